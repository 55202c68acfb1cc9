#include "mdm/report.hpp"

#include <cstdio>
#include <sstream>

#include "mdm/errors.hpp"
#include "mdm/model_io.hpp"

namespace mdm {

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.4e", x);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : std::string(width - s.size(), ' ') + s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

double parse_double(const std::string& s) {
  std::size_t used = 0;
  double x = 0.0;
  try {
    x = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw ValidationError("runs CSV: bad number '" + s + "'");
  return x;
}

}  // namespace

OutputPaths output_paths(const std::filesystem::path& dir, const std::string& name,
                         McMethod method) {
  const std::string stem = name + "_" + to_string(method);
  return {dir / (stem + "_table.txt"), dir / (stem + "_table.csv"),
          dir / (stem + "_runs.csv")};
}

std::string format_table_text(const McResult& r) {
  const bool with_est = r.mean_est_cov_diag.has_value();
  std::ostringstream out;
  out << r.name << ", " << to_string(r.method) << " MDM, " << r.runs()
      << " Monte-Carlo runs\n\n";
  constexpr std::size_t w = 14;
  out << pad("param", 10) << pad("true", w) << pad("s_mean", w) << pad("s_cov", w);
  if (with_est) out << pad("est_cov", w);
  out << "\n";
  for (Index i = 0; i < r.alpha_true.size(); ++i) {
    const std::string label = static_cast<std::size_t>(i) < r.labels.size()
                                  ? r.labels[static_cast<std::size_t>(i)]
                                  : "alpha_" + std::to_string(i + 1);
    out << pad(label, 10) << pad(sci(r.alpha_true(i)), w) << pad(sci(r.sample_mean(i)), w)
        << pad(sci(r.sample_cov_diag(i)), w);
    if (with_est) out << pad(sci((*r.mean_est_cov_diag)(i)), w);
    out << "\n";
  }
  out << "\nruntime per run: " << sci(r.wall_time_per_run) << " s\n";
  if (r.repaired_runs > 0) {
    out << "runs with clipped Q/R in the weighting step: " << r.repaired_runs << "\n";
  }
  return out.str();
}

std::string format_table_csv(const McResult& r) {
  const bool with_est = r.mean_est_cov_diag.has_value();
  std::ostringstream out;
  out << "param,true,s_mean,s_cov" << (with_est ? ",est_cov" : "") << "\n";
  for (Index i = 0; i < r.alpha_true.size(); ++i) {
    out << r.labels.at(static_cast<std::size_t>(i)) << "," << num(r.alpha_true(i)) << ","
        << num(r.sample_mean(i)) << "," << num(r.sample_cov_diag(i));
    if (with_est) out << "," << num((*r.mean_est_cov_diag)(i));
    out << "\n";
  }
  return out.str();
}

std::string format_runs_csv(const McResult& r) {
  const bool with_est = r.est_cov_diag.has_value();
  const Index p = r.alpha_true.size();
  std::ostringstream out;
  out << "run,seed";
  for (Index i = 0; i < p; ++i) out << "," << r.labels.at(static_cast<std::size_t>(i));
  if (with_est) {
    for (Index i = 0; i < p; ++i) {
      out << ",est_cov_" << r.labels.at(static_cast<std::size_t>(i));
    }
  }
  out << "\ntrue,";
  for (Index i = 0; i < p; ++i) out << "," << num(r.alpha_true(i));
  if (with_est) {
    for (Index i = 0; i < p; ++i) out << ",";
  }
  out << "\n";
  for (Index run = 0; run < r.runs(); ++run) {
    out << run << "," << r.seeds.at(static_cast<std::size_t>(run));
    for (Index i = 0; i < p; ++i) out << "," << num(r.estimates(run, i));
    if (with_est) {
      for (Index i = 0; i < p; ++i) out << "," << num((*r.est_cov_diag)(run, i));
    }
    out << "\n";
  }
  return out.str();
}

void emit_table(const McResult& result, const std::filesystem::path& txt,
                const std::filesystem::path& csv) {
  write_text_file(txt, format_table_text(result));
  write_text_file(csv, format_table_csv(result));
}

void emit_plot_data(const McResult& result, const std::filesystem::path& runs_csv) {
  write_text_file(runs_csv, format_runs_csv(result));
}

RunsTable parse_runs_csv(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw ValidationError("runs CSV is empty");
  const auto header = split(line, ',');
  if (header.size() < 3 || header[0] != "run" || header[1] != "seed") {
    throw ValidationError("runs CSV: unexpected header");
  }
  RunsTable t;
  std::size_t p = header.size() - 2;
  bool with_est = false;
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i].rfind("est_cov_", 0) == 0) with_est = true;
  }
  if (with_est) {
    if (p % 2 != 0) throw ValidationError("runs CSV: unbalanced est_cov columns");
    p /= 2;
  }
  t.labels.assign(header.begin() + 2, header.begin() + 2 + static_cast<long>(p));

  std::vector<std::vector<double>> rows;
  std::vector<std::vector<double>> covs;
  bool have_true = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != header.size()) throw ValidationError("runs CSV: ragged row");
    if (f[0] == "true") {
      t.alpha_true.resize(static_cast<Index>(p));
      for (std::size_t i = 0; i < p; ++i) t.alpha_true(static_cast<Index>(i)) = parse_double(f[2 + i]);
      have_true = true;
      continue;
    }
    t.seeds.push_back(std::stoull(f[1]));
    std::vector<double> row;
    for (std::size_t i = 0; i < p; ++i) row.push_back(parse_double(f[2 + i]));
    rows.push_back(std::move(row));
    if (with_est) {
      std::vector<double> c;
      for (std::size_t i = 0; i < p; ++i) c.push_back(parse_double(f[2 + p + i]));
      covs.push_back(std::move(c));
    }
  }
  if (!have_true) throw ValidationError("runs CSV: missing 'true' row");
  t.estimates.resize(static_cast<Index>(rows.size()), static_cast<Index>(p));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t i = 0; i < p; ++i) t.estimates(static_cast<Index>(r), static_cast<Index>(i)) = rows[r][i];
  }
  if (with_est) {
    Mat c(static_cast<Index>(covs.size()), static_cast<Index>(p));
    for (std::size_t r = 0; r < covs.size(); ++r) {
      for (std::size_t i = 0; i < p; ++i) c(static_cast<Index>(r), static_cast<Index>(i)) = covs[r][i];
    }
    t.est_cov_diag = std::move(c);
  }
  return t;
}

}  // namespace mdm
