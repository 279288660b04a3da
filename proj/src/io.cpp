#include "hmmclass/io.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <system_error>

#include "hmmclass/error.hpp"

namespace fs = std::filesystem;

namespace hmmclass {

std::string format_double(double value) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return {buf.data(), res.ptr};
}

namespace {

[[noreturn]] void parse_error(const std::string& what) { throw HmmError(ErrorCode::ParseError, what); }

const Json& field(const Json& doc, const char* key) {
  if (!doc.is_object() || !doc.contains(key)) parse_error(std::string("missing field \"") + key + "\"");
  return doc.at(key);
}

std::vector<double> number_array(const Json& node, const std::string& name) {
  if (!node.is_array()) parse_error(name + " must be an array");
  std::vector<double> out;
  out.reserve(node.size());
  for (const auto& v : node) {
    if (!v.is_number()) parse_error(name + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

Matrix number_matrix(const Json& node, std::size_t rows, const std::string& name) {
  if (!node.is_array() || node.size() != rows) {
    parse_error(name + " must be an array of " + std::to_string(rows) + " rows");
  }
  std::size_t cols = 0;
  Matrix out;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = number_array(node[r], name + " row");
    if (r == 0) {
      cols = row.size();
      out = Matrix(rows, cols);
    }
    if (row.size() != cols) parse_error(name + " rows differ in length");
    for (std::size_t c = 0; c < cols; ++c) out(r, c) = row[c];
  }
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json out = Json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    const auto row = m.row(r);
    out.push_back(Json(std::vector<double>(row.begin(), row.end())));
  }
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool parse_real(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  if (text.empty()) return false;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), out);
  return res.ec == std::errc() && res.ptr == text.data() + text.size() && std::isfinite(out);
}

[[noreturn]] void malformed(const fs::path& path, std::size_t offset, const std::string& what) {
  parse_error(path.string() + " at byte " + std::to_string(offset) + ": " + what);
}

// Calls fn(line, byte_offset) for each nonblank line.
template <typename F>
void for_each_line(const std::string& text, F&& fn) {
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    const std::string_view line(text.data() + pos, end - pos);
    if (!trim(line).empty()) fn(line, pos);
    pos = end + 1;
  }
}

}  // namespace

Json model_to_json(const HmmModel& model) {
  Json doc;
  doc["n_states"] = model.n_states();
  doc["pi"] = model.pi;
  doc["trans"] = matrix_to_json(model.trans);
  Json emission;
  emission["kind"] = std::string(to_string(model.kind()));
  if (model.kind() == EmissionKind::Discrete) {
    emission["n_symbols"] = model.discrete().n_symbols();
    emission["obs"] = matrix_to_json(model.discrete().obs);
  } else {
    emission["means"] = model.gaussian().means;
    emission["variances"] = model.gaussian().variances;
  }
  doc["emission"] = std::move(emission);
  return doc;
}

HmmModel model_from_json(const Json& doc) {
  const auto& n_node = field(doc, "n_states");
  if (!n_node.is_number_unsigned() || n_node.get<std::size_t>() == 0) {
    parse_error("n_states must be a positive integer");
  }
  const auto n = n_node.get<std::size_t>();
  HmmModel model;
  model.pi = number_array(field(doc, "pi"), "pi");
  if (model.pi.size() != n) parse_error("pi length does not match n_states");
  model.trans = number_matrix(field(doc, "trans"), n, "trans");
  if (model.trans.cols() != n) parse_error("trans must be n_states x n_states");

  const auto& emission = field(doc, "emission");
  const auto& kind = field(emission, "kind");
  if (!kind.is_string()) parse_error("emission.kind must be a string");
  if (kind == "gaussian") {
    GaussianEmission g;
    g.means = number_array(field(emission, "means"), "means");
    g.variances = number_array(field(emission, "variances"), "variances");
    model.emission = std::move(g);
  } else if (kind == "discrete") {
    model.emission = DiscreteEmission{number_matrix(field(emission, "obs"), n, "obs")};
  } else {
    parse_error("unknown emission kind " + kind.get<std::string>());
  }
  validate(model, 0.0);
  return model;
}

Json bank_to_json(const ModelBank& bank) {
  Json doc;
  doc["format"] = std::string(kBankFormat);
  doc["version"] = 1;
  doc["emission_kind"] = std::string(to_string(bank.kind()));
  Json models = Json::array();
  for (const auto& entry : bank.entries()) {
    Json item;
    item["label"] = entry.label.name();
    item["model"] = model_to_json(entry.model);
    models.push_back(std::move(item));
  }
  doc["models"] = std::move(models);
  return doc;
}

ModelBank bank_from_json(const Json& doc) {
  if (field(doc, "format") != std::string(kBankFormat)) parse_error("not a model bank document");
  const auto& models = field(doc, "models");
  if (!models.is_array() || models.empty()) parse_error("models must be a nonempty array");
  ModelBank bank;
  for (const auto& item : models) {
    const auto& label = field(item, "label");
    if (!label.is_string()) parse_error("label must be a string");
    bank.add(ClassLabel(label.get<std::string>()), model_from_json(field(item, "model")));
  }
  if (doc.contains("emission_kind") && doc["emission_kind"] != std::string(to_string(bank.kind()))) {
    parse_error("emission_kind does not match the stored models");
  }
  return bank;
}

void write_bank(const fs::path& path, const ModelBank& bank) { write_json(path, bank_to_json(bank)); }

ModelBank read_bank(const fs::path& path) {
  const std::string text = read_text(path);
  Json doc;
  try {
    doc = Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    parse_error(path.string() + " at byte " + std::to_string(e.byte) + ": invalid JSON");
  }
  return bank_from_json(doc);
}

Json report_to_json(const TrainingReport& report) {
  Json doc;
  doc["iterations_run"] = report.iterations_run;
  doc["converged"] = report.converged;
  doc["final_loglik"] = report.final_loglik;
  doc["loglik_trace"] = report.loglik_trace;
  Json starved = Json::array();
  for (const auto& s : report.starved) {
    starved.push_back(Json{{"iteration", s.iteration}, {"state", s.state}});
  }
  doc["starved_states"] = std::move(starved);
  return doc;
}

std::string trace_csv(const TrainingReport& report) {
  std::string out = "iteration,loglik\n";
  for (std::size_t i = 0; i < report.loglik_trace.size(); ++i) {
    out += std::to_string(i) + "," + format_double(report.loglik_trace[i]) + "\n";
  }
  return out;
}

namespace {

template <typename Cell>
std::string labelled_table(const ConfusionMatrix& cm, Cell&& cell) {
  std::string out = "true\\predicted";
  for (const auto& l : cm.labels) out += "," + l;
  out += "\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    out += cm.labels[i];
    for (std::size_t j = 0; j < cm.labels.size(); ++j) out += "," + cell(i, j);
    out += "\n";
  }
  return out;
}

}  // namespace

std::string confusion_csv(const ConfusionMatrix& cm) {
  return labelled_table(cm, [&](std::size_t i, std::size_t j) {
    return format_double(cm.percentages[i][j]);
  });
}

std::string confusion_counts_csv(const ConfusionMatrix& cm) {
  return labelled_table(cm, [&](std::size_t i, std::size_t j) {
    return std::to_string(cm.counts[i][j]);
  });
}

Json confusion_to_json(const ConfusionMatrix& cm) {
  Json doc;
  doc["labels"] = cm.labels;
  doc["counts"] = cm.counts;
  doc["percentages"] = cm.percentages;
  return doc;
}

std::string confusion_gnuplot(const ConfusionMatrix& cm) {
  std::string out = "# true_index pred_index percentage;";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    out += " " + std::to_string(i) + "=" + cm.labels[i];
  }
  out += "\n";
  for (std::size_t i = 0; i < cm.labels.size(); ++i) {
    for (std::size_t j = 0; j < cm.labels.size(); ++j) {
      out += std::to_string(i) + " " + std::to_string(j) + " " +
             format_double(cm.percentages[i][j]) + "\n";
    }
  }
  return out;
}

std::vector<double> read_series_csv(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<double> out;
  for_each_line(text, [&](std::string_view line, std::size_t offset) {
    double v = 0.0;
    if (!parse_real(line, v)) malformed(path, offset, "expected one real value per line");
    out.push_back(v);
  });
  if (out.empty()) parse_error(path.string() + ": series file has no values");
  return out;
}

std::string series_csv(std::span<const double> values) {
  std::string out;
  out.reserve(values.size() * 20);
  for (const double v : values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

ImageGrid read_image_csv(const fs::path& path) {
  const std::string text = read_text(path);
  std::vector<std::vector<double>> rows;
  for_each_line(text, [&](std::string_view line, std::size_t offset) {
    std::vector<double> row;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const auto cell = line.substr(start, comma == std::string_view::npos ? line.npos : comma - start);
      double v = 0.0;
      if (!parse_real(cell, v)) malformed(path, offset + start, "expected a real value");
      row.push_back(v);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      malformed(path, offset, "row length differs from the first row");
    }
    rows.push_back(std::move(row));
  });
  if (rows.empty()) parse_error(path.string() + ": image file has no rows");
  return ImageGrid::from_rows(rows);
}

ImageGrid read_image_pgm(const fs::path& path) {
  const std::string data = read_text(path);
  std::size_t pos = 0;

  auto skip_space = [&] {
    while (pos < data.size()) {
      if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space();
    const std::size_t start = pos;
    unsigned long value = 0;
    const auto res = std::from_chars(data.data() + pos, data.data() + data.size(), value);
    if (res.ec != std::errc() || value == 0) malformed(path, start, std::string("bad ") + what);
    pos = static_cast<std::size_t>(res.ptr - data.data());
    return static_cast<std::size_t>(value);
  };

  if (data.size() < 2 || data[0] != 'P' || (data[1] != '5' && data[1] != '2')) {
    malformed(path, 0, "missing P5/P2 magic");
  }
  const bool binary = data[1] == '5';
  pos = 2;
  const std::size_t width = read_uint("width");
  const std::size_t height = read_uint("height");
  const std::size_t maxval = read_uint("maxval");
  if (maxval > 65535) malformed(path, pos, "maxval above 65535");

  Matrix values(height, width);
  if (binary) {
    if (pos >= data.size() || !std::isspace(static_cast<unsigned char>(data[pos]))) {
      malformed(path, pos, "expected whitespace before raster");
    }
    ++pos;
    const std::size_t bytes = maxval < 256 ? 1 : 2;
    const std::size_t need = width * height * bytes;
    if (data.size() - pos < need) malformed(path, data.size(), "raster is truncated");
    const auto* raster = reinterpret_cast<const unsigned char*>(data.data() + pos);
    for (std::size_t i = 0; i < width * height; ++i) {
      const unsigned v = bytes == 1 ? raster[i] : (raster[2 * i] << 8U) | raster[2 * i + 1];
      if (v > maxval) malformed(path, pos + i * bytes, "sample exceeds maxval");
      values(i / width, i % width) = static_cast<double>(v);
    }
  } else {
    for (std::size_t i = 0; i < width * height; ++i) {
      skip_space();
      const std::size_t start = pos;
      unsigned long v = 0;
      const auto res = std::from_chars(data.data() + pos, data.data() + data.size(), v);
      if (res.ec != std::errc() || v > maxval) malformed(path, start, "bad sample");
      pos = static_cast<std::size_t>(res.ptr - data.data());
      values(i / width, i % width) = static_cast<double>(v);
    }
  }
  return ImageGrid(std::move(values));
}

ImageGrid read_image(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HmmError(ErrorCode::IoError, "cannot open " + path.string());
  char magic[2] = {0, 0};
  in.read(magic, 2);
  if (magic[0] == 'P' && (magic[1] == '5' || magic[1] == '2')) return read_image_pgm(path);
  return read_image_csv(path);
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw HmmError(ErrorCode::IoError, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_atomic(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw HmmError(ErrorCode::IoError, "cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw HmmError(ErrorCode::IoError, "short write to " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) throw HmmError(ErrorCode::IoError, "cannot rename onto " + path.string() + ": " + ec.message());
}

void write_json(const fs::path& path, const Json& doc) { write_text_atomic(path, doc.dump(2) + "\n"); }

}  // namespace hmmclass
