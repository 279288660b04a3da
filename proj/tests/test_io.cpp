#include "doctest.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include "fixtures.hpp"
#include "hmmclass/error.hpp"
#include "hmmclass/inference.hpp"
#include "hmmclass/io.hpp"
#include "hmmclass/synthetic.hpp"
#include "oracle.hpp"

using namespace hmmclass;
namespace fs = std::filesystem;

namespace {

ErrorCode code_of(auto&& fn, std::string* message = nullptr) {
  try {
    fn();
  } catch (const HmmError& e) {
    if (message) *message = e.what();
    return e.code();
  }
  FAIL("expected HmmError");
  return ErrorCode::IoError;
}

struct TempDir {
  fs::path path;
  TempDir() {
    std::random_device rd;
    path = fs::temp_directory_path() / ("hmmclass_io_" + std::to_string(rd()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  fs::path write(const std::string& name, const std::string& bytes) const {
    std::ofstream out(path / name, std::ios::binary);
    out << bytes;
    return path / name;
  }
};

}  // namespace

TEST_CASE("format_double round-trips") {
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-1e300, 1e300);
  for (int i = 0; i < 1000; ++i) {
    const double x = i % 2 ? u(rng) : std::ldexp(u(rng), -1990);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(0.1) == "0.1");
}

TEST_CASE("bank round trip preserves log-likelihoods bit for bit") {
  std::mt19937_64 rng(11);
  ModelBank bank;
  for (int c = 0; c < 3; ++c) {
    bank.add(ClassLabel("g" + std::to_string(c)), oracle::random_model(4, EmissionKind::Gaussian, rng));
  }
  TempDir dir;
  write_bank(dir.path / "bank.json", bank);
  const auto back = read_bank(dir.path / "bank.json");
  CHECK(back == bank);
  for (int p = 0; p < 20; ++p) {
    const auto seq = oracle::random_sequence(EmissionKind::Gaussian, 50, rng);
    for (std::size_t c = 0; c < 3; ++c) {
      CHECK(log_likelihood(back.entries()[c].model, seq) == log_likelihood(bank.entries()[c].model, seq));
    }
  }

  ModelBank discrete;
  discrete.add(ClassLabel("d"), oracle::random_model(3, EmissionKind::Discrete, rng, 5));
  CHECK(bank_from_json(bank_to_json(discrete)) == discrete);
}

TEST_CASE("schema violations are ParseError") {
  const auto good = model_to_json(fixtures::two_state_reference());
  CHECK(model_from_json(good) == fixtures::two_state_reference());

  auto bad = good;
  bad.erase("pi");
  CHECK(code_of([&] { model_from_json(bad); }) == ErrorCode::ParseError);
  bad = good;
  bad["n_states"] = 3;
  CHECK(code_of([&] { model_from_json(bad); }) == ErrorCode::ParseError);
  bad = good;
  bad["emission"]["kind"] = "poisson";
  CHECK(code_of([&] { model_from_json(bad); }) == ErrorCode::ParseError);
  bad = good;
  bad["trans"][0][0] = "x";
  CHECK(code_of([&] { model_from_json(bad); }) == ErrorCode::ParseError);
  bad = good;
  bad["pi"] = Json::array({0.7, 0.7});
  CHECK(code_of([&] { model_from_json(bad); }) == ErrorCode::InvalidModel);

  TempDir dir;
  const auto broken = dir.write("bank.json", "{\"format\": ");
  CHECK(code_of([&] { read_bank(broken); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { read_bank(dir.path / "absent.json"); }) == ErrorCode::IoError);
  const auto wrong = dir.write("other.json", R"({"format": "other", "version": 1, "models": []})");
  CHECK(code_of([&] { read_bank(wrong); }) == ErrorCode::ParseError);
}

TEST_CASE("series CSV") {
  TempDir dir;
  const std::vector<double> v{1.5, -2.25, 1e-300, 3};
  const auto p = dir.write("s.csv", series_csv(v));
  CHECK(read_series_csv(p) == v);
  CHECK(read_series_csv(dir.write("blank.csv", "1\n\n2\n")) == std::vector<double>{1, 2});

  std::string message;
  const auto bad = dir.write("bad.csv", "1\n2\nabc\n");
  CHECK(code_of([&] { read_series_csv(bad); }, &message) == ErrorCode::ParseError);
  CHECK(message.find("bad.csv") != std::string::npos);
  CHECK(message.find("byte 4") != std::string::npos);
}

TEST_CASE("image readers") {
  TempDir dir;
  const auto csv = dir.write("img.csv", "1,2,3\n4,5,6\n");
  const auto grid = read_image(csv);
  CHECK(unfold_horizontal(grid) == std::vector<double>{1, 2, 3, 4, 5, 6});

  std::string message;
  const auto ragged = dir.write("ragged.csv", "1,2,3\n4,5\n");
  CHECK(code_of([&] { read_image_csv(ragged); }, &message) == ErrorCode::ParseError);
  CHECK(message.find("byte 6") != std::string::npos);

  std::string p5 = "P5\n# comment\n3 2\n255\n";
  for (const unsigned char b : {0, 10, 20, 30, 40, 255}) p5.push_back(static_cast<char>(b));
  CHECK(unfold_horizontal(read_image(dir.write("a.pgm", p5))) == std::vector<double>{0, 10, 20, 30, 40, 255});

  std::string p16 = "P5 2 1 65535\n";
  for (const unsigned char b : {0x01, 0x02, 0xff, 0xff}) p16.push_back(static_cast<char>(b));
  CHECK(unfold_horizontal(read_image(dir.write("b.pgm", p16))) == std::vector<double>{258, 65535});

  CHECK(unfold_horizontal(read_image(dir.write("c.pgm", "P2\n2 2\n9\n1 2\n3 9\n"))) ==
        std::vector<double>{1, 2, 3, 9});

  const auto truncated = dir.write("t.pgm", "P5\n3 2\n255\nab");
  CHECK(code_of([&] { read_image_pgm(truncated); }) == ErrorCode::ParseError);
  CHECK(code_of([&] { read_image_pgm(dir.write("x.pgm", "P2\n1 1\n9\n12\n")); }) == ErrorCode::ParseError);
}

TEST_CASE("confusion exports") {
  ConfusionMatrix cm;
  cm.labels = {"A", "B"};
  cm.counts = {{3, 1}, {0, 4}};
  cm.update_percentages();

  CHECK(confusion_counts_csv(cm) == "true\\predicted,A,B\nA,3,1\nB,0,4\n");
  CHECK(confusion_csv(cm) == "true\\predicted,A,B\nA,75,25\nB,0,100\n");

  const auto j = confusion_to_json(cm);
  CHECK(j["labels"] == Json::array({"A", "B"}));
  CHECK(j["counts"][0][1] == 1);
  CHECK(j["percentages"][1][1] == 100.0);

  const auto dat = confusion_gnuplot(cm);
  CHECK(dat.rfind("#", 0) == 0);
  CHECK(dat.find("\n0 0 75\n0 1 25\n1 0 0\n1 1 100\n") != std::string::npos);
}

TEST_CASE("training report exports") {
  TrainingReport r;
  r.iterations_run = 2;
  r.converged = true;
  r.loglik_trace = {-10.5, -9.25, -9.0};
  r.final_loglik = -9.0;
  CHECK(trace_csv(r) == "iteration,loglik\n0,-10.5\n1,-9.25\n2,-9\n");
  const auto j = report_to_json(r);
  CHECK(j["iterations_run"] == 2);
  CHECK(j["converged"] == true);
  CHECK(j["loglik_trace"].size() == 3);
}

TEST_CASE("atomic writes replace the target") {
  TempDir dir;
  write_text_atomic(dir.path / "f.txt", "one");
  write_text_atomic(dir.path / "f.txt", "two");
  CHECK(read_text(dir.path / "f.txt") == "two");
  std::size_t files = 0;
  for ([[maybe_unused]] const auto& e : fs::directory_iterator(dir.path)) ++files;
  CHECK(files == 1);
}
