#include "glomkit/io.hpp"

#include <png.h>

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace glomkit::io {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out << content;
  if (!out) throw IoError("failed writing " + path.string());
}

std::string csv_escape(const std::string& field) {
  if (field.find_first_of(",\"\n") == std::string::npos) return field;
  std::string out = "\"";
  for (char c : field) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

std::vector<std::vector<std::string>> read_csv(const fs::path& path) {
  const std::string text = read_file(path);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      row.push_back(std::move(field));
      field.clear();
    } else if (c == '\n') {
      if (!field.empty() && field.back() == '\r') field.pop_back();
      row.push_back(std::move(field));
      field.clear();
      // Skip comment lines (report headers) and blank lines.
      if (!(row.size() == 1 && (row[0].empty() || row[0].starts_with("#"))))
        rows.push_back(std::move(row));
      row.clear();
    } else {
      field += c;
    }
  }
  if (!field.empty() || !row.empty()) {
    if (!field.empty() && field.back() == '\r') field.pop_back();
    row.push_back(std::move(field));
    if (!(row.size() == 1 && (row[0].empty() || row[0].starts_with("#"))))
      rows.push_back(std::move(row));
  }
  return rows;
}

namespace {

void validate_mask_values(EntityMask& mask, const std::string& origin) {
  for (std::size_t i = 0; i < mask.labels.size(); ++i)
    if (mask.labels[i] > 2)
      throw ValidationError(origin + ": label value " +
                            std::to_string(mask.labels[i]) +
                            " outside {0,1,2}");
}

}  // namespace

EntityMask read_pgm(const fs::path& path, double resolution) {
  const std::string data = read_file(path);
  std::size_t pos = 0;
  auto next_token = [&]() -> std::string {
    while (pos < data.size()) {
      if (std::isspace(static_cast<unsigned char>(data[pos]))) {
        ++pos;
      } else if (data[pos] == '#') {
        while (pos < data.size() && data[pos] != '\n') ++pos;
      } else {
        break;
      }
    }
    std::size_t start = pos;
    while (pos < data.size() &&
           !std::isspace(static_cast<unsigned char>(data[pos])))
      ++pos;
    return data.substr(start, pos - start);
  };

  if (next_token() != "P5")
    throw IoError(path.string() + ": not a binary PGM (P5)");
  EntityMask mask;
  try {
    mask.width = std::stoi(next_token());
    mask.height = std::stoi(next_token());
    const int maxval = std::stoi(next_token());
    if (maxval <= 0 || maxval > 255)
      throw IoError(path.string() + ": unsupported maxval");
  } catch (const std::logic_error&) {
    throw IoError(path.string() + ": malformed PGM header");
  }
  ++pos;  // single whitespace after maxval
  const std::size_t expected =
      static_cast<std::size_t>(mask.width) * static_cast<std::size_t>(mask.height);
  if (mask.width <= 0 || mask.height <= 0 || data.size() - pos < expected)
    throw IoError(path.string() + ": truncated PGM payload");
  mask.labels.assign(data.begin() + static_cast<std::ptrdiff_t>(pos),
                     data.begin() + static_cast<std::ptrdiff_t>(pos + expected));
  mask.resolution = resolution;
  validate_mask_values(mask, path.string());
  return mask;
}

void write_pgm(const fs::path& path, const EntityMask& mask) {
  std::string out = "P5\n" + std::to_string(mask.width) + " " +
                    std::to_string(mask.height) + "\n255\n";
  out.append(mask.labels.begin(), mask.labels.end());
  write_file(path, out);
}

EntityMask read_png(const fs::path& path, double resolution) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_file(&image, path.string().c_str()))
    throw IoError(path.string() + ": " + image.message);
  image.format = PNG_FORMAT_GRAY;
  EntityMask mask;
  mask.width = static_cast<int>(image.width);
  mask.height = static_cast<int>(image.height);
  mask.labels.resize(PNG_IMAGE_SIZE(image));
  if (!png_image_finish_read(&image, nullptr, mask.labels.data(), 0, nullptr)) {
    png_image_free(&image);
    throw IoError(path.string() + ": " + image.message);
  }
  mask.resolution = resolution;
  validate_mask_values(mask, path.string());
  return mask;
}

void write_png(const fs::path& path, const EntityMask& mask) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(mask.width);
  image.height = static_cast<png_uint_32>(mask.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.string().c_str(), 0,
                               mask.labels.data(), 0, nullptr))
    throw IoError(path.string() + ": " + image.message);
}

EntityMask read_mask(const fs::path& path, double resolution) {
  const std::string ext = path.extension().string();
  if (ext == ".pgm") return read_pgm(path, resolution);
  if (ext == ".png") return read_png(path, resolution);
  throw IoError(path.string() + ": unsupported mask format " + ext);
}

std::size_t MaskCohort::valid_masks() const {
  std::size_t n = 0;
  for (const auto& [id, masks] : cases) n += masks.size();
  return n;
}

MaskCohort load_mask_cohort(const fs::path& root, double resolution) {
  if (!fs::is_directory(root))
    throw IoError("mask root is not a directory: " + root.string());
  MaskCohort cohort;
  std::vector<fs::path> case_dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) case_dirs.push_back(entry.path());
  std::sort(case_dirs.begin(), case_dirs.end());

  for (const fs::path& dir : case_dirs) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
      if (!entry.is_regular_file()) continue;
      const std::string ext = entry.path().extension().string();
      if (ext == ".pgm" || ext == ".png") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());

    std::vector<NamedMask> masks;
    for (const fs::path& f : files) {
      const std::string id = f.stem().string();
      const bool duplicate =
          std::any_of(masks.begin(), masks.end(),
                      [&](const NamedMask& m) { return m.id == id; });
      if (duplicate) {
        cohort.issues.push_back({f.string(), "DuplicateId: glomerulus '" + id +
                                                 "' already present in case"});
        continue;
      }
      try {
        NamedMask nm;
        nm.id = id;
        nm.mask = read_mask(f, resolution);
        nm.mask.validate();
        masks.push_back(std::move(nm));
      } catch (const Error& e) {
        cohort.issues.push_back({f.string(), e.what()});
      }
    }
    if (!masks.empty())
      cohort.cases.emplace_back(dir.filename().string(), std::move(masks));
  }
  if (cohort.valid_masks() == 0)
    throw EmptyCohort("no valid masks under " + root.string());
  return cohort;
}

ClinicalLoad load_clinical(const fs::path& path, const BinningSpec& spec) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw MissingHeader(path.string() + ": empty file");
  const auto& header = rows.front();
  const auto case_it = std::find(header.begin(), header.end(), "case_id");
  if (case_it == header.end())
    throw MissingHeader(path.string() + ": header lacks case_id");
  const std::size_t case_col =
      static_cast<std::size_t>(case_it - header.begin());

  ClinicalLoad load;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c == case_col) continue;
    if (!spec.find(header[c]))
      load.warnings.push_back("unknown column '" + header[c] +
                              "' not in the binning spec; ignored");
  }

  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw ValidationError(path.string() + ": row " + std::to_string(r + 1) +
                            " has " + std::to_string(row.size()) +
                            " cells, expected " + std::to_string(header.size()));
    ClinicalRecord rec;
    rec.case_id = row[case_col];
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == case_col) continue;
      const VariableSpec* vs = spec.find(header[c]);
      if (!vs) continue;
      const std::string& cell = row[c];
      if (cell.empty()) {
        rec.values[header[c]] = ClinicalValue::missing();
        continue;
      }
      if (vs->kind == VariableSpec::Kind::Thresholded) {
        try {
          std::size_t used = 0;
          const double v = std::stod(cell, &used);
          if (used != cell.size()) throw std::invalid_argument(cell);
          rec.values[header[c]] = ClinicalValue::numeric(v);
        } catch (const std::logic_error&) {
          throw UnparsableNumeric(path.string() + ": row " +
                                  std::to_string(r + 1) + ", column '" +
                                  header[c] + "': cannot parse '" + cell + "'");
        }
      } else {
        rec.values[header[c]] = ClinicalValue::categorical(cell);
      }
    }
    load.records.push_back(std::move(rec));
  }
  return load;
}

BinningSpec load_binning_spec(const fs::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  BinningSpec spec;
  if (!j.contains("variables") || !j["variables"].is_object())
    throw ValidationError(path.string() + ": missing 'variables' object");
  for (const auto& [name, v] : j["variables"].items()) {
    VariableSpec vs;
    const std::string kind = v.value("kind", "");
    if (kind == "categorical") {
      vs.kind = VariableSpec::Kind::Categorical;
    } else if (kind == "thresholded") {
      vs.kind = VariableSpec::Kind::Thresholded;
      for (const auto& t : v.at("thresholds")) vs.thresholds.push_back(t.get<double>());
    } else {
      throw ValidationError(path.string() + ": variable '" + name +
                            "' has unknown kind '" + kind + "'");
    }
    for (const auto& l : v.at("labels")) vs.labels.push_back(l.get<std::string>());
    if (v.contains("aliases"))
      for (const auto& [raw, canon] : v["aliases"].items())
        vs.aliases[raw] = canon.get<std::string>();
    const std::string boundary = v.value("boundary", "above");
    if (boundary == "above") vs.boundary = VariableSpec::Boundary::Above;
    else if (boundary == "below") vs.boundary = VariableSpec::Boundary::Below;
    else
      throw ValidationError(path.string() + ": variable '" + name +
                            "' has unknown boundary '" + boundary + "'");
    vs.validate(name);
    spec.variables.emplace_back(name, std::move(vs));
  }
  return spec;
}

std::string binning_spec_json(const BinningSpec& spec) {
  ordered_json j;
  j["variables"] = ordered_json::object();
  for (const auto& [name, vs] : spec.variables) {
    ordered_json v;
    v["kind"] = vs.kind == VariableSpec::Kind::Categorical ? "categorical"
                                                           : "thresholded";
    if (vs.kind == VariableSpec::Kind::Thresholded) v["thresholds"] = vs.thresholds;
    v["labels"] = vs.labels;
    if (!vs.aliases.empty()) v["aliases"] = vs.aliases;
    v["boundary"] =
        vs.boundary == VariableSpec::Boundary::Above ? "above" : "below";
    j["variables"][name] = std::move(v);
  }
  return j.dump(2) + "\n";
}

fewshot::EmbeddingDataset load_embeddings_csv(const fs::path& path) {
  const auto rows = read_csv(path);
  if (rows.size() < 2)
    throw ValidationError(path.string() + ": need a header and data rows");
  const auto& header = rows.front();
  if (header.size() < 3 || header[0] != "id" || header[1] != "label")
    throw ValidationError(path.string() + ": header must be id,label,f0..");
  const Eigen::Index d = static_cast<Eigen::Index>(header.size() - 2);
  fewshot::EmbeddingDataset data;
  data.vectors.resize(static_cast<Eigen::Index>(rows.size() - 1), d);
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != header.size())
      throw ValidationError(path.string() + ": row " + std::to_string(r + 1) +
                            " has wrong cell count");
    data.ids.push_back(row[0]);
    try {
      data.labels.push_back(std::stoi(row[1]));
      for (Eigen::Index c = 0; c < d; ++c)
        data.vectors(static_cast<Eigen::Index>(r - 1), c) =
            std::stod(row[static_cast<std::size_t>(c) + 2]);
    } catch (const std::logic_error&) {
      throw UnparsableNumeric(path.string() + ": row " + std::to_string(r + 1) +
                              ": numeric parse failure");
    }
  }
  data.validate();
  return data;
}

fewshot::EmbeddingDataset load_embeddings_raw(const fs::path& matrix_path,
                                              const fs::path& sidecar_path) {
  ordered_json meta;
  try {
    meta = ordered_json::parse(read_file(sidecar_path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(sidecar_path.string() + ": " + e.what());
  }
  const Eigen::Index n = meta.at("n").get<Eigen::Index>();
  const Eigen::Index d = meta.at("d").get<Eigen::Index>();
  const std::string raw = read_file(matrix_path);
  if (raw.size() != static_cast<std::size_t>(n) * static_cast<std::size_t>(d) * 4)
    throw ValidationError(matrix_path.string() + ": size does not match n*d float32");
  fewshot::EmbeddingDataset data;
  data.vectors.resize(n, d);
  const auto* floats = reinterpret_cast<const float*>(raw.data());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      data.vectors(i, j) = static_cast<double>(floats[i * d + j]);
  for (const auto& id : meta.at("ids")) data.ids.push_back(id.get<std::string>());
  for (const auto& l : meta.at("labels")) data.labels.push_back(l.get<int>());
  data.validate();
  return data;
}

void write_embeddings_csv(const fs::path& path,
                          const fewshot::EmbeddingDataset& data) {
  std::string out = "id,label";
  for (Eigen::Index j = 0; j < data.dim(); ++j)
    out += ",f" + std::to_string(j);
  out += "\n";
  char buf[64];
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    out += csv_escape(data.ids.empty() ? "e" + std::to_string(i) : data.ids[static_cast<std::size_t>(i)]);
    out += "," + std::to_string(data.labels[static_cast<std::size_t>(i)]);
    for (Eigen::Index j = 0; j < data.dim(); ++j) {
      std::snprintf(buf, sizeof buf, ",%.17g", data.vectors(i, j));
      out += buf;
    }
    out += "\n";
  }
  write_file(path, out);
}

MatrixXd read_grid_csv(const fs::path& path) {
  const auto rows = read_csv(path);
  if (rows.empty()) throw ValidationError(path.string() + ": empty grid");
  const std::size_t w = rows.front().size();
  MatrixXd grid(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(w));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != w)
      throw ValidationError(path.string() + ": ragged row " + std::to_string(r + 1));
    for (std::size_t c = 0; c < w; ++c) {
      try {
        grid(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
            std::stod(rows[r][c]);
      } catch (const std::logic_error&) {
        throw UnparsableNumeric(path.string() + ": cell (" + std::to_string(r + 1) +
                                "," + std::to_string(c + 1) + ")");
      }
    }
  }
  return grid;
}

void write_grid_csv(const fs::path& path, const MatrixXd& grid) {
  std::string out;
  char buf[64];
  for (Eigen::Index r = 0; r < grid.rows(); ++r) {
    for (Eigen::Index c = 0; c < grid.cols(); ++c) {
      std::snprintf(buf, sizeof buf, c == 0 ? "%.17g" : ",%.17g", grid(r, c));
      out += buf;
    }
    out += "\n";
  }
  write_file(path, out);
}

std::map<std::string, std::vector<stats::Box>> read_boxes_json(
    const fs::path& path) {
  ordered_json j;
  try {
    j = ordered_json::parse(read_file(path));
  } catch (const nlohmann::json::parse_error& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  std::map<std::string, std::vector<stats::Box>> boxes;
  for (const auto& [id, list] : j.items()) {
    for (const auto& b : list) {
      if (!b.is_array() || b.size() != 4)
        throw ValidationError(path.string() + ": box for '" + id +
                              "' must be [x,y,w,h]");
      boxes[id].push_back({b[0].get<int>(), b[1].get<int>(), b[2].get<int>(),
                           b[3].get<int>()});
    }
  }
  return boxes;
}

}  // namespace glomkit::io
