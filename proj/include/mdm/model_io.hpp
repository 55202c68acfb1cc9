#ifndef MDM_MODEL_IO_HPP
#define MDM_MODEL_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "mdm/model.hpp"

namespace mdm {

/// Contents of a model file.
///
/// JSON layout: `n_x, n_w, n_v, tau, F, G, E, H, D, basis` and optionally
/// `alpha_true`, `init` and `u`. A matrix is a number (1x1) or an array of
/// rows. Each of F, G, E, H, D is a single matrix (broadcast over k) or an
/// array of tau + 1 matrices. `basis` is an array of `{"BQ": ..., "BR": ...}`.
/// `init` is `{"mean": [...], "cov": ...}` and defaults to ones / identity.
/// `u` is either an array of per-step vectors or the string "sin", meaning
/// u_k = sin(k / (tau + 1)).
struct ModelSpec {
  LtvModel model;
  NoiseStructure structure;
  std::optional<Vec> alpha_true;
  InitialCondition init;
  std::optional<InputSignal> input;
  /// True when `u` was given as "sin"; preserved on output.
  bool sinusoidal_input = false;
};

ModelSpec parse_model_spec(std::string_view json_text);
ModelSpec load_model_spec(const std::filesystem::path& path);
std::string dump_model_spec(const ModelSpec& spec);
void save_model_spec(const ModelSpec& spec, const std::filesystem::path& path);

/// JSON Lines, one record per k: {"k": int, "z": [...], "u": [...]}.
/// `u` is omitted when the data carries no inputs.
MeasurementData parse_measurements(std::string_view jsonl_text);
MeasurementData read_measurements(const std::filesystem::path& path);
std::string dump_measurements(const MeasurementData& data);
void write_measurements(const MeasurementData& data,
                        const std::filesystem::path& path);

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, std::string_view text);

}  // namespace mdm

#endif  // MDM_MODEL_IO_HPP
