#include "apmionet/cli/artifacts.hpp"

#include <openssl/evp.h>
#include <png.h>

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace apmionet {

namespace fs = std::filesystem;

std::string git_blob_sha1(const std::string& bytes) {
  const std::string head = "blob " + std::to_string(bytes.size()) + '\0';
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), head.data(), head.size()) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 || EVP_DigestFinal_ex(ctx.get(), md, &len) != 1) {
    throw std::runtime_error("SHA-1 digest failed");
  }
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

std::string git_blob_sha1_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot read " + path);
  std::stringstream ss;
  ss << is.rdbuf();
  return git_blob_sha1(ss.str());
}

namespace {

using Rgb = std::array<unsigned char, 3>;

Rgb colormap(double s) {
  // viridis, five stops
  static const double stops[5][3] = {
      {68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}};
  s = std::clamp(s, 0.0, 1.0) * 4.0;
  const int k = std::min(3, static_cast<int>(s));
  const double w = s - k;
  Rgb c{};
  for (int i = 0; i < 3; ++i) c[i] = static_cast<unsigned char>(std::lround((1 - w) * stops[k][i] + w * stops[k + 1][i]));
  return c;
}

void write_png(const std::string& path, int w, int h, const std::vector<unsigned char>& rgb) {
  std::FILE* fp = std::fopen(path.c_str(), "wb");
  if (!fp) throw std::runtime_error("cannot write " + path);
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
  png_infop info = png ? png_create_info_struct(png) : nullptr;
  if (!png || !info || setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
    throw std::runtime_error("libpng failed writing " + path);
  }
  png_init_io(png, fp);
  png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
  png_write_info(png, info);
  for (int y = 0; y < h; ++y) {
    png_write_row(png, const_cast<png_bytep>(rgb.data() + static_cast<std::size_t>(y) * w * 3));
  }
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  if (std::fclose(fp) != 0) throw std::runtime_error("failed writing " + path);
}

}  // namespace

void write_heatmap_png(const std::string& path, const RowMat& m, int min_px) {
  if (m.size() == 0) throw std::invalid_argument("heatmap of an empty matrix");
  const auto rows = static_cast<int>(m.rows());
  const auto cols = static_cast<int>(m.cols());
  const int sy = std::max(1, (min_px + rows - 1) / rows);
  const int sx = std::max(1, (min_px + cols - 1) / cols);
  const int w = cols * sx;
  const int h = rows * sy;
  const double lo = m.minCoeff();
  const double hi = m.maxCoeff();
  const double span = hi > lo ? hi - lo : 1.0;
  std::vector<unsigned char> rgb(static_cast<std::size_t>(w) * h * 3);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const Rgb c = colormap((m(y / sy, x / sx) - lo) / span);
      std::copy(c.begin(), c.end(), rgb.begin() + (static_cast<std::ptrdiff_t>(y) * w + x) * 3);
    }
  }
  write_png(path, w, h, rgb);
}

void write_lines_png(const std::string& path, const std::vector<LineSeries>& series, bool log_y, int width,
                     int height) {
  if (series.empty()) throw std::invalid_argument("line chart without series");
  auto ty = [&](double y) { return log_y ? std::log10(std::max(y, 1e-300)) : y; };
  double x0 = 1e300, x1 = -1e300, y0 = 1e300, y1 = -1e300;
  for (const auto& s : series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("line series length mismatch");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      x0 = std::min(x0, s.x[i]);
      x1 = std::max(x1, s.x[i]);
      y0 = std::min(y0, ty(s.y[i]));
      y1 = std::max(y1, ty(s.y[i]));
    }
  }
  if (!(x1 > x0)) x1 = x0 + 1.0;
  if (!(y1 > y0)) y1 = y0 + 1.0;
  std::vector<unsigned char> rgb(static_cast<std::size_t>(width) * height * 3, 255);
  const int pad = 30;
  auto put = [&](int x, int y, const Rgb& c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    std::copy(c.begin(), c.end(), rgb.begin() + (static_cast<std::ptrdiff_t>(y) * width + x) * 3);
  };
  const Rgb axis{0, 0, 0};
  for (int x = pad; x <= width - pad; ++x) {
    put(x, height - pad, axis);
    put(x, pad, axis);
  }
  for (int y = pad; y <= height - pad; ++y) {
    put(pad, y, axis);
    put(width - pad, y, axis);
  }
  static const Rgb palette[] = {{31, 119, 180}, {214, 39, 40}, {44, 160, 44}, {148, 103, 189}};
  auto px = [&](double x) { return pad + (x - x0) / (x1 - x0) * (width - 2 * pad); };
  auto py = [&](double y) { return height - pad - (ty(y) - y0) / (y1 - y0) * (height - 2 * pad); };
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const Rgb c = palette[k % 4];
    for (std::size_t i = 0; i + 1 < s.x.size(); ++i) {
      const double ax = px(s.x[i]), ay = py(s.y[i]), bx = px(s.x[i + 1]), by = py(s.y[i + 1]);
      const int steps = std::max(1, static_cast<int>(std::ceil(std::max(std::abs(bx - ax), std::abs(by - ay)))));
      for (int t = 0; t <= steps; ++t) {
        const double u = static_cast<double>(t) / steps;
        const int x = static_cast<int>(std::lround(ax + u * (bx - ax)));
        const int y = static_cast<int>(std::lround(ay + u * (by - ay)));
        put(x, y, c);
        put(x, y + 1, c);
      }
    }
  }
  write_png(path, width, height, rgb);
}

std::string utc_timestamp() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_manifest(const ManifestInfo& info) {
  nlohmann::ordered_json j;
  j["command"] = info.command;
  j["config"] = info.config_path;
  j["config_sha1"] = info.config_sha1;
  j["seed"] = info.seed;
  j["output_dir"] = info.out_dir;
  j["started"] = info.started;
  j["finished"] = info.finished;
  std::vector<std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(info.out_dir)) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), info.out_dir).generic_string();
    if (rel != "manifest.json") files.push_back(rel);
  }
  std::sort(files.begin(), files.end());
  auto& arts = j["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& f : files) {
    const auto p = (fs::path(info.out_dir) / f).string();
    arts.push_back({{"file", f}, {"sha1", git_blob_sha1_file(p)}, {"bytes", fs::file_size(p)}});
  }
  std::ofstream os(fs::path(info.out_dir) / "manifest.json", std::ios::trunc);
  if (!os) throw std::runtime_error("cannot write manifest in " + info.out_dir);
  os << j.dump(2) << '\n';
}

}  // namespace apmionet
