#include "doctest.h"

#include <fstream>

#include "cli_runner.hpp"
#include "hmmclass/io.hpp"

using cli::run;

namespace {

void write_file(const std::string& path, const std::string& content) {
  std::ofstream(path, std::ios::binary) << content;
}

}  // namespace

TEST_CASE("help and bad flags") {
  CHECK(run("--help").exit_code == 0);
  CHECK(run("train --states 0 --data-root /nonexistent").exit_code == 2);
  CHECK(run("train --init sideways").exit_code == 2);
  CHECK(run("frobnicate").exit_code == 2);
}

TEST_CASE("preprocess diagnostics") {
  cli::ScratchDir dir("hmmclass_cli");
  const auto missing = run("preprocess " + (dir / "absent.pgm") + " --out " + (dir / "out"));
  CHECK(missing.exit_code == 2);
  CHECK(missing.output.find("absent.pgm") != std::string::npos);

  write_file(dir / "flat.csv", "3,3,3\n3,3,3\n");
  const auto flat = run("preprocess " + (dir / "flat.csv") + " --window 2 --out " + (dir / "out"));
  CHECK(flat.exit_code == 2);
  CHECK(flat.output.find("DegenerateVariance") != std::string::npos);

  write_file(dir / "bad.csv", "1,2\n3,x\n");
  const auto bad = run("preprocess " + (dir / "bad.csv") + " --window 2 --out " + (dir / "out"));
  CHECK(bad.exit_code == 2);
  CHECK(bad.output.find("byte 6") != std::string::npos);

  write_file(dir / "img.csv", "1,2,3,4\n5,6,7,9\n");
  const auto ok = run("preprocess " + (dir / "img.csv") + " --window 4 --out " + (dir / "out"));
  CHECK(ok.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "out/img_w00000.csv"));
  CHECK(std::filesystem::exists(dir / "out/img_w00001.csv"));
  CHECK(std::filesystem::exists(dir / "out/manifest.json"));
}

TEST_CASE("synth, train, classify, evaluate") {
  cli::ScratchDir dir("hmmclass_cli");
  const std::string data = dir / "data";
  REQUIRE(run("synth --classes 2 --states 2 --train 4 --test 3 --length 80 --seed 9 --out " + data).exit_code ==
          0);

  const auto train = [&](const std::string& out) {
    return run("train --data-root " + data + "/train --states 2 --max-iters 30 --seed 4 --out " + out);
  };
  REQUIRE(train(dir / "m1").exit_code == 0);
  REQUIRE(train(dir / "m2").exit_code == 0);
  CHECK(hmmclass::read_text(dir / "m1/bank.json") == hmmclass::read_text(dir / "m2/bank.json"));
  CHECK(std::filesystem::exists(dir / "m1/reports/class0_trace.csv"));

  const auto eval = run("evaluate --bank " + (dir / "m1/bank.json") + " --data-root " + data + "/test --out " +
                        (dir / "eval"));
  CHECK(eval.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "eval/confusion.csv"));
  CHECK(std::filesystem::exists(dir / "eval/confusion.json"));
  CHECK(std::filesystem::exists(dir / "eval/confusion.dat"));

  const std::string series = data + "/test/class1/class1_00000.csv";
  const auto cls = run("classify --bank " + (dir / "m1/bank.json") + " " + series + " --out " + (dir / "cls"));
  CHECK(cls.exit_code == 0);
  const auto scores = hmmclass::read_text(dir / "cls/scores.csv");
  CHECK(scores.rfind("file,class0,class1,predicted\n", 0) == 0);
  CHECK(scores.find(",class1\n") != std::string::npos);

  const auto mismatch = run("classify --bank " + (dir / "m1/bank.json") + " --emission discrete " + series +
                            " --out " + (dir / "cls2"));
  CHECK(mismatch.exit_code == 2);
  CHECK(mismatch.output.find("TypeMismatch") != std::string::npos);

  std::filesystem::create_directories(dir / "unknown/stranger");
  std::filesystem::copy_file(series, dir / "unknown/stranger/s.csv");
  const auto unknown = run("evaluate --bank " + (dir / "m1/bank.json") + " --data-root " + (dir / "unknown") +
                           " --out " + (dir / "eval2"));
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.output.find("UnknownLabel") != std::string::npos);

  std::filesystem::create_directories(dir / "empty/class0");
  CHECK(run("train --data-root " + (dir / "empty") + " --states 2 --out " + (dir / "m3")).exit_code == 2);
}
