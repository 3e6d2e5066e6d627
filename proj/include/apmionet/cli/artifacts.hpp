#pragma once

#include <string>
#include <vector>

#include "apmionet/refsolver/field.hpp"

namespace apmionet {

/// Git blob hash: SHA-1 of "blob <size>\0" followed by the bytes.
std::string git_blob_sha1(const std::string& bytes);
std::string git_blob_sha1_file(const std::string& path);

/// 8-bit RGB heat map of m (rows drawn top to bottom), each cell scaled up to
/// at least `min_px` pixels on the shorter side.
void write_heatmap_png(const std::string& path, const RowMat& m, int min_px = 256);

struct LineSeries {
  std::vector<double> x;
  std::vector<double> y;
};

/// Line chart of one or more series on shared axes (no text).
void write_lines_png(const std::string& path, const std::vector<LineSeries>& series, bool log_y, int width = 640,
                     int height = 400);

struct ManifestInfo {
  std::string command;
  std::string config_path;
  std::string config_sha1;
  unsigned long long seed = 0;
  std::string out_dir;
  std::string started;
  std::string finished;
};

/// Writes out_dir/manifest.json listing every other file below out_dir.
void write_manifest(const ManifestInfo& info);

/// UTC, ISO 8601.
std::string utc_timestamp();

}  // namespace apmionet
