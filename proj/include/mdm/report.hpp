#ifndef MDM_REPORT_HPP
#define MDM_REPORT_HPP

#include <filesystem>
#include <string>
#include <string_view>

#include "mdm/harness.hpp"

namespace mdm {

struct OutputPaths {
  std::filesystem::path table_txt;
  std::filesystem::path table_csv;
  std::filesystem::path runs_csv;
};

/// <dir>/<name>_<method>_table.txt, _table.csv and _runs.csv.
OutputPaths output_paths(const std::filesystem::path& dir, const std::string& name,
                         McMethod method);

/// Aligned text table with a runtime footer.
std::string format_table_text(const McResult& result);

/// param,true,s_mean,s_cov[,est_cov]
std::string format_table_csv(const McResult& result);

/// run,seed,<labels>[,est_cov_<label>...]; the first data row holds the true
/// values under run = "true".
std::string format_runs_csv(const McResult& result);

void emit_table(const McResult& result, const std::filesystem::path& txt,
                const std::filesystem::path& csv);
void emit_plot_data(const McResult& result, const std::filesystem::path& runs_csv);

struct RunsTable {
  std::vector<std::string> labels;
  Vec alpha_true;
  std::vector<std::uint64_t> seeds;
  Mat estimates;
  std::optional<Mat> est_cov_diag;
};

/// Inverse of format_runs_csv. Throws ValidationError on malformed input.
RunsTable parse_runs_csv(std::string_view text);

}  // namespace mdm

#endif  // MDM_REPORT_HPP
