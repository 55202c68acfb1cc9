#include "mdm/model_io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "mdm/errors.hpp"

namespace mdm {

using nlohmann::json;

namespace {

bool is_matrix(const json& j) {
  if (j.is_number()) return true;
  if (!j.is_array()) return false;
  for (const json& row : j) {
    if (!row.is_array()) return false;
    for (const json& x : row) {
      if (!x.is_number()) return false;
    }
  }
  return true;
}

Mat matrix_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
  if (!is_matrix(j)) throw ValidationError(what + ": expected a matrix");
  const auto rows = static_cast<Index>(j.size());
  const auto cols = rows == 0 ? Index{0} : static_cast<Index>(j.front().size());
  Mat m(rows, cols);
  for (Index r = 0; r < rows; ++r) {
    const json& row = j[static_cast<std::size_t>(r)];
    if (static_cast<Index>(row.size()) != cols) {
      throw ValidationError(what + ": ragged matrix rows");
    }
    for (Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
  }
  return m;
}

Vec vector_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return Vec::Constant(1, j.get<double>());
  if (!j.is_array()) throw ValidationError(what + ": expected an array of numbers");
  Vec v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ValidationError(what + ": expected numbers");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

StepSequence sequence_from_json(const json& j, const std::string& what) {
  if (is_matrix(j)) {
    // A flat array of numbers is a per-step scalar sequence.
    if (j.is_array() && !j.empty() && j.front().is_number()) {
      std::vector<Mat> items;
      for (const json& x : j) items.push_back(matrix_from_json(x, what));
      return StepSequence::per_step(std::move(items));
    }
    return StepSequence::constant(matrix_from_json(j, what));
  }
  if (!j.is_array()) throw ValidationError(what + ": expected a matrix or a sequence");
  std::vector<Mat> items;
  items.reserve(j.size());
  for (std::size_t k = 0; k < j.size(); ++k) {
    items.push_back(matrix_from_json(j[k], what + "[" + std::to_string(k) + "]"));
  }
  return StepSequence::per_step(std::move(items));
}

json matrix_to_json(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json vector_to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

json sequence_to_json(const StepSequence& s) {
  if (s.is_constant()) return matrix_to_json(s.at(0));
  json out = json::array();
  for (const Mat& m : s.items()) out.push_back(matrix_to_json(m));
  return out;
}

Index count_field(const json& doc, const char* key) {
  if (!doc.contains(key) || !doc[key].is_number_integer()) {
    throw ValidationError(std::string("model file: missing integer field '") + key + "'");
  }
  return doc[key].get<Index>();
}

}  // namespace

ModelSpec parse_model_spec(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ValidationError("model file must hold a JSON object");

  ModelSpec spec;
  LtvModel& m = spec.model;
  m.n_x = count_field(doc, "n_x");
  m.n_w = count_field(doc, "n_w");
  m.n_v = count_field(doc, "n_v");
  m.tau = count_field(doc, "tau");
  for (const char* key : {"F", "G", "E", "H", "D", "basis"}) {
    if (!doc.contains(key)) {
      throw ValidationError(std::string("model file: missing field '") + key + "'");
    }
  }
  m.F = sequence_from_json(doc["F"], "F");
  m.G = sequence_from_json(doc["G"], "G");
  m.E = sequence_from_json(doc["E"], "E");
  m.H = sequence_from_json(doc["H"], "H");
  m.D = sequence_from_json(doc["D"], "D");

  const json& basis = doc["basis"];
  if (!basis.is_array()) throw ValidationError("model file: 'basis' must be an array");
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const json& pair = basis[i];
    const std::string at = "basis[" + std::to_string(i) + "]";
    if (!pair.is_object() || !pair.contains("BQ") || !pair.contains("BR")) {
      throw ValidationError(at + " must be an object with BQ and BR");
    }
    spec.structure.bq.push_back(matrix_from_json(pair["BQ"], at + ".BQ"));
    spec.structure.br.push_back(matrix_from_json(pair["BR"], at + ".BR"));
  }

  if (doc.contains("alpha_true") && !doc["alpha_true"].is_null()) {
    spec.alpha_true = vector_from_json(doc["alpha_true"], "alpha_true");
  }
  spec.init = InitialCondition::standard(m.n_x);
  if (doc.contains("init") && !doc["init"].is_null()) {
    const json& init = doc["init"];
    if (init.contains("mean")) spec.init.mean = vector_from_json(init["mean"], "init.mean");
    if (init.contains("cov")) spec.init.cov = matrix_from_json(init["cov"], "init.cov");
  }
  if (doc.contains("u") && !doc["u"].is_null()) {
    const json& u = doc["u"];
    if (u.is_string()) {
      if (u.get<std::string>() != "sin") {
        throw ValidationError("model file: 'u' string must be \"sin\"");
      }
      spec.input = sinusoidal_input(m.tau, static_cast<double>(m.tau + 1));
      spec.sinusoidal_input = true;
    } else if (u.is_array()) {
      InputSignal signal;
      for (std::size_t k = 0; k < u.size(); ++k) {
        signal.push_back(vector_from_json(u[k], "u[" + std::to_string(k) + "]"));
      }
      spec.input = std::move(signal);
    } else {
      throw ValidationError("model file: 'u' must be an array or \"sin\"");
    }
  }
  return spec;
}

std::string dump_model_spec(const ModelSpec& spec) {
  const LtvModel& m = spec.model;
  json doc;
  doc["n_x"] = m.n_x;
  doc["n_w"] = m.n_w;
  doc["n_v"] = m.n_v;
  doc["tau"] = m.tau;
  doc["F"] = sequence_to_json(m.F);
  doc["G"] = sequence_to_json(m.G);
  doc["E"] = sequence_to_json(m.E);
  doc["H"] = sequence_to_json(m.H);
  doc["D"] = sequence_to_json(m.D);
  json basis = json::array();
  for (std::size_t i = 0; i < spec.structure.bq.size(); ++i) {
    basis.push_back({{"BQ", matrix_to_json(spec.structure.bq[i])},
                     {"BR", matrix_to_json(spec.structure.br[i])}});
  }
  doc["basis"] = std::move(basis);
  if (spec.alpha_true) doc["alpha_true"] = vector_to_json(*spec.alpha_true);
  doc["init"] = {{"mean", vector_to_json(spec.init.mean)},
                 {"cov", matrix_to_json(spec.init.cov)}};
  if (spec.sinusoidal_input) {
    doc["u"] = "sin";
  } else if (spec.input) {
    json u = json::array();
    for (const Vec& uk : *spec.input) u.push_back(vector_to_json(uk));
    doc["u"] = std::move(u);
  }
  return doc.dump(2) + "\n";
}

ModelSpec load_model_spec(const std::filesystem::path& path) {
  return parse_model_spec(read_text_file(path));
}

void save_model_spec(const ModelSpec& spec, const std::filesystem::path& path) {
  write_text_file(path, dump_model_spec(spec));
}

MeasurementData parse_measurements(std::string_view jsonl_text) {
  MeasurementData data;
  std::istringstream in{std::string(jsonl_text)};
  std::string line;
  std::size_t line_no = 0;
  bool any_u = false;
  bool all_u = true;
  InputSignal inputs;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    json rec;
    try {
      rec = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError("data line " + std::to_string(line_no) +
                            " is not valid JSON: " + e.what());
    }
    if (!rec.is_object() || !rec.contains("k") || !rec["k"].is_number_integer() ||
        !rec.contains("z")) {
      throw ValidationError("data line " + std::to_string(line_no) +
                            " must be an object with integer 'k' and array 'z'");
    }
    const auto k = rec["k"].get<Index>();
    if (k != static_cast<Index>(data.z.size())) {
      throw ValidationError("data line " + std::to_string(line_no) + ": expected k=" +
                            std::to_string(data.z.size()) + ", got k=" +
                            std::to_string(k) + " (records must be consecutive from 0)");
    }
    data.z.push_back(vector_from_json(rec["z"], "z"));
    if (rec.contains("u") && !rec["u"].is_null()) {
      any_u = true;
      inputs.push_back(vector_from_json(rec["u"], "u"));
    } else {
      all_u = false;
      inputs.emplace_back();
    }
  }
  if (any_u) {
    // The last input is never used by the recursion, so it may be absent.
    bool usable = true;
    for (std::size_t k = 0; k + 1 < inputs.size(); ++k) {
      if (inputs[k].size() == 0) usable = false;
    }
    if (!usable && !all_u) {
      throw ValidationError("data: 'u' is present on some records but missing on others");
    }
    data.u = std::move(inputs);
  }
  return data;
}

MeasurementData read_measurements(const std::filesystem::path& path) {
  return parse_measurements(read_text_file(path));
}

std::string dump_measurements(const MeasurementData& data) {
  std::string out;
  for (std::size_t k = 0; k < data.z.size(); ++k) {
    json rec;
    rec["k"] = k;
    rec["z"] = vector_to_json(data.z[k]);
    if (data.u && k < data.u->size() && (*data.u)[k].size() > 0) {
      rec["u"] = vector_to_json((*data.u)[k]);
    }
    out += rec.dump();
    out += '\n';
  }
  return out;
}

void write_measurements(const MeasurementData& data,
                        const std::filesystem::path& path) {
  write_text_file(path, dump_measurements(data));
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(path.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("failed writing " + path.string());
}

}  // namespace mdm
