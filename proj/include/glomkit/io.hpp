#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "glomkit/associate.hpp"
#include "glomkit/clinical.hpp"
#include "glomkit/fewshot.hpp"
#include "glomkit/mask.hpp"

namespace glomkit::io {

struct EmptyCohort : ValidationError {
  using ValidationError::ValidationError;
};
struct MissingHeader : ValidationError {
  using ValidationError::ValidationError;
};
struct UnparsableNumeric : ValidationError {
  using ValidationError::ValidationError;
};

// ---- generic CSV (comma separated, quoted strings, UTF-8, LF) ----

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& path);
std::string csv_escape(const std::string& field);
void write_file(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

// ---- mask rasters ----

EntityMask read_pgm(const std::filesystem::path& path, double resolution = 1.0);
EntityMask read_png(const std::filesystem::path& path, double resolution = 1.0);
/// Dispatch on the file extension (.pgm / .png).
EntityMask read_mask(const std::filesystem::path& path, double resolution = 1.0);
void write_pgm(const std::filesystem::path& path, const EntityMask& mask);
void write_png(const std::filesystem::path& path, const EntityMask& mask);

struct NamedMask {
  std::string id;
  EntityMask mask;
};

struct MaskIssue {
  std::string path;
  std::string reason;
};

struct MaskCohort {
  // case id -> masks, both levels sorted by id
  std::vector<std::pair<std::string, std::vector<NamedMask>>> cases;
  std::vector<MaskIssue> issues;
  std::size_t valid_masks() const;
};

/// Walk `<root>/<case>/<glomerulus>.{pgm,png}`; malformed files and
/// duplicate ids become issue entries and loading continues. Throws
/// EmptyCohort when nothing valid remains.
MaskCohort load_mask_cohort(const std::filesystem::path& root,
                            double resolution = 1.0);

// ---- clinical tables ----

struct ClinicalLoad {
  std::vector<ClinicalRecord> records;
  std::vector<std::string> warnings;  // unknown columns etc.
};

/// CSV with a `case_id` column; cells typed by the binning spec
/// (thresholded -> numeric, categorical -> string), empty cells missing.
ClinicalLoad load_clinical(const std::filesystem::path& path,
                           const BinningSpec& spec);

BinningSpec load_binning_spec(const std::filesystem::path& path);
std::string binning_spec_json(const BinningSpec& spec);

// ---- embeddings ----

/// CSV layout: id,label,f0..f{d-1}.
fewshot::EmbeddingDataset load_embeddings_csv(const std::filesystem::path& path);
/// Raw little-endian float32 row-major matrix plus a JSON sidecar
/// {"n":..,"d":..,"ids":[..],"labels":[..]}.
fewshot::EmbeddingDataset load_embeddings_raw(
    const std::filesystem::path& matrix_path,
    const std::filesystem::path& sidecar_path);
void write_embeddings_csv(const std::filesystem::path& path,
                          const fewshot::EmbeddingDataset& data);

// ---- attention grids ----

/// Rectangular CSV of floats.
MatrixXd read_grid_csv(const std::filesystem::path& path);
void write_grid_csv(const std::filesystem::path& path, const MatrixXd& grid);
/// {"<grid-id>": [[x, y, w, h], ...], ...}
std::map<std::string, std::vector<stats::Box>> read_boxes_json(
    const std::filesystem::path& path);

}  // namespace glomkit::io
