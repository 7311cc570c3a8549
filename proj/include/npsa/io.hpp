#pragma once

// File formats: binary PGM (P5), ENVI-style raw cubes (text header + raw
// little-endian samples) and plain numeric CSV. Readers either return a fully
// populated object or throw; they never hand back partial data.

#include <algorithm>
#include <bit>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "npsa/error.hpp"
#include "npsa/linalg.hpp"
#include "npsa/tensor3.hpp"
#include "npsa/whitening.hpp"

namespace npsa {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "raw cube I/O assumes a little-endian host");

namespace detail {

inline std::vector<char> read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return std::vector<char>(std::istreambuf_iterator<char>(in), {});
}

inline void write_all(const fs::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot create " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::IoError, "write failed for " + path.string());
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  const auto t = trim(text);
  if (t.empty()) return false;
  const char* first = t.data();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, t.data() + t.size(), out);
  return ec == std::errc() && ptr == t.data() + t.size();
}

}  // namespace detail

// ---- PGM ------------------------------------------------------------------

/// Row-major grayscale plane; pixel (x, y) is pixels[y * width + x].
struct ImagePlane {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<double> pixels;

  friend bool operator==(const ImagePlane&, const ImagePlane&) = default;
};

/// Binary P5 only. Samples are scaled to [0, 1] by maxval; 16-bit samples
/// are big-endian as the format prescribes.
inline ImagePlane read_pgm(const fs::path& path) {
  const std::vector<char> bytes = detail::read_all(path);
  std::size_t pos = 0;

  auto skip_space_and_comments = [&] {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(static_cast<unsigned char>(bytes[pos]))) {
        ++pos;
      } else {
        break;
      }
    }
  };
  auto read_uint = [&](const char* what) {
    skip_space_and_comments();
    const std::size_t start = pos;
    while (pos < bytes.size() && std::isdigit(static_cast<unsigned char>(bytes[pos]))) ++pos;
    unsigned long v = 0;
    if (start == pos || !detail::parse_number(std::string_view(&bytes[start], pos - start), v))
      throw Error(ErrorCode::MalformedHeader, std::string("PGM ") + what + " is not a number");
    return v;
  };

  if (bytes.size() < 2 || bytes[0] != 'P')
    throw Error(ErrorCode::MalformedHeader, "missing PGM magic number");
  if (bytes[1] != '5')
    throw Error(ErrorCode::MalformedHeader,
                std::string("unsupported PNM variant P") + bytes[1] + " (only binary P5 is read)");
  pos = 2;
  const unsigned long width = read_uint("width");
  const unsigned long height = read_uint("height");
  const unsigned long maxval = read_uint("maxval");
  if (width == 0 || height == 0) throw Error(ErrorCode::MalformedHeader, "PGM has zero size");
  if (maxval == 0 || maxval > 65535) throw Error(ErrorCode::MalformedHeader, "PGM maxval out of range");
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos])))
    throw Error(ErrorCode::MalformedHeader, "PGM header must end with one whitespace byte");
  ++pos;

  const std::size_t bpp = maxval < 256 ? 1 : 2;
  const std::size_t count = width * height;
  if (bytes.size() - pos < count * bpp)
    throw Error(ErrorCode::TruncatedData, "PGM raster shorter than width*height samples");

  ImagePlane img{width, height, std::vector<double>(count)};
  const auto* raw = reinterpret_cast<const unsigned char*>(bytes.data() + pos);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bpp == 1 ? raw[i] : (unsigned(raw[2 * i]) << 8) | raw[2 * i + 1];
    if (v > maxval) throw Error(ErrorCode::MalformedHeader, "PGM sample exceeds maxval");
    img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
  }
  return img;
}

/// Values are clamped to [0, 1] and stored as round(v * maxval), halves away
/// from zero, so a write/read round trip is exact to 1/maxval.
inline void write_pgm(const fs::path& path, const ImagePlane& img, unsigned maxval = 255) {
  if (maxval == 0 || maxval > 65535) throw Error(ErrorCode::Validation, "maxval must be in [1, 65535]");
  if (img.pixels.size() != img.width * img.height)
    throw Error(ErrorCode::ShapeMismatch, "pixel count differs from width*height");
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n" +
                    std::to_string(maxval) + "\n";
  const bool wide = maxval >= 256;
  for (double v : img.pixels) {
    const double c = std::isfinite(v) ? std::clamp(v, 0.0, 1.0) : 0.0;
    const auto q = static_cast<unsigned>(std::lround(c * maxval));
    if (wide) out.push_back(static_cast<char>(q >> 8));
    out.push_back(static_cast<char>(q & 0xFF));
  }
  detail::write_all(path, out);
}

/// Linear stretch of arbitrary values onto [0, 1]; constant planes map to 0.
inline ImagePlane min_max_stretch(std::size_t width, std::size_t height, std::span<const double> v) {
  ImagePlane img{width, height, std::vector<double>(v.begin(), v.end())};
  if (v.empty()) return img;
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  const double span = *hi - *lo;
  for (double& x : img.pixels) x = span > 0.0 ? (x - *lo) / span : 0.0;
  return img;
}

// ---- ENVI-style cubes -------------------------------------------------------

enum class Interleave { BSQ, BIL, BIP };

constexpr std::string_view to_string(Interleave i) noexcept {
  switch (i) {
    case Interleave::BSQ: return "bsq";
    case Interleave::BIL: return "bil";
    case Interleave::BIP: return "bip";
  }
  return "bsq";
}

/// ENVI "data type" codes accepted by the reader.
enum class CubeDataType : int { UInt8 = 1, Int16 = 2, Float32 = 4, UInt16 = 12 };

inline std::size_t bytes_per_sample(CubeDataType t) {
  switch (t) {
    case CubeDataType::UInt8: return 1;
    case CubeDataType::Int16:
    case CubeDataType::UInt16: return 2;
    case CubeDataType::Float32: return 4;
  }
  return 0;
}

struct Cube {
  std::size_t samples = 0;
  std::size_t lines = 0;
  std::size_t bands = 0;
  Interleave interleave = Interleave::BSQ;  // layout of data
  std::vector<double> data;

  std::size_t index(std::size_t sample, std::size_t line, std::size_t band) const noexcept {
    switch (interleave) {
      case Interleave::BSQ: return (band * lines + line) * samples + sample;
      case Interleave::BIL: return (line * bands + band) * samples + sample;
      case Interleave::BIP: return (line * samples + sample) * bands + band;
    }
    return 0;
  }
  double value(std::size_t sample, std::size_t line, std::size_t band) const noexcept {
    return data[index(sample, line, band)];
  }

  Cube with_interleave(Interleave target) const {
    Cube out{samples, lines, bands, target, std::vector<double>(data.size())};
    for (std::size_t b = 0; b < bands; ++b)
      for (std::size_t l = 0; l < lines; ++l)
        for (std::size_t s = 0; s < samples; ++s) out.data[out.index(s, l, b)] = value(s, l, b);
    return out;
  }

  friend bool operator==(const Cube&, const Cube&) = default;
};

struct CubeHeader {
  std::size_t samples = 0;
  std::size_t lines = 0;
  std::size_t bands = 0;
  Interleave interleave = Interleave::BSQ;
  CubeDataType data_type = CubeDataType::Float32;
  std::size_t header_offset = 0;
};

/// Parses "key = value" lines (keys case-insensitive; brace values may span
/// lines). Little-endian data only.
inline CubeHeader parse_cube_header(std::string_view text) {
  std::map<std::string, std::string> kv;
  std::istringstream in{std::string(text)};
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    std::string key = detail::lower(detail::trim(std::string_view(line).substr(0, eq)));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (!value.empty() && value.front() == '{') {
      while (value.find('}') == std::string::npos && std::getline(in, line)) value += " " + line;
    }
    kv[key] = value;
  }

  auto require = [&](const std::string& key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw Error(ErrorCode::MissingKey, "cube header lacks '" + key + "'");
    return it->second;
  };
  auto count = [&](const std::string& key) {
    std::size_t v = 0;
    if (!detail::parse_number(require(key), v) || v == 0)
      throw Error(ErrorCode::MalformedHeader, "cube header key '" + key + "' must be a positive integer");
    return v;
  };

  CubeHeader h;
  h.samples = count("samples");
  h.lines = count("lines");
  h.bands = count("bands");

  const std::string il = detail::lower(require("interleave"));
  if (il == "bsq") h.interleave = Interleave::BSQ;
  else if (il == "bil") h.interleave = Interleave::BIL;
  else if (il == "bip") h.interleave = Interleave::BIP;
  else throw Error(ErrorCode::MalformedHeader, "unknown interleave '" + il + "'");

  int dt = 0;
  if (!detail::parse_number(require("data type"), dt))
    throw Error(ErrorCode::MalformedHeader, "data type is not an integer");
  switch (dt) {
    case 1: case 2: case 4: case 12: h.data_type = static_cast<CubeDataType>(dt); break;
    default:
      throw Error(ErrorCode::UnsupportedDataType,
                  "data type " + std::to_string(dt) + " (supported: 1, 2, 4, 12)");
  }

  if (auto it = kv.find("byte order"); it != kv.end()) {
    int bo = -1;
    if (!detail::parse_number(it->second, bo) || (bo != 0 && bo != 1))
      throw Error(ErrorCode::MalformedHeader, "byte order must be 0 or 1");
    if (bo == 1) throw Error(ErrorCode::UnsupportedDataType, "big-endian cubes are not supported");
  }
  if (auto it = kv.find("header offset"); it != kv.end()) {
    if (!detail::parse_number(it->second, h.header_offset))
      throw Error(ErrorCode::MalformedHeader, "header offset is not an integer");
  }
  return h;
}

inline Cube read_cube(const fs::path& header_path, const fs::path& data_path) {
  const std::vector<char> htext = detail::read_all(header_path);
  const CubeHeader h = parse_cube_header(std::string_view(htext.data(), htext.size()));
  const std::vector<char> raw = detail::read_all(data_path);

  const std::size_t count = h.samples * h.lines * h.bands;
  const std::size_t bps = bytes_per_sample(h.data_type);
  const std::size_t expected = h.header_offset + count * bps;
  if (raw.size() != expected)
    throw Error(ErrorCode::SizeMismatch, "data file holds " + std::to_string(raw.size()) +
                                             " bytes, header implies " + std::to_string(expected));

  Cube stored{h.samples, h.lines, h.bands, h.interleave, std::vector<double>(count)};
  const char* p = raw.data() + h.header_offset;
  for (std::size_t i = 0; i < count; ++i, p += bps) {
    switch (h.data_type) {
      case CubeDataType::UInt8: stored.data[i] = static_cast<unsigned char>(*p); break;
      case CubeDataType::Int16: { std::int16_t v; std::memcpy(&v, p, 2); stored.data[i] = v; break; }
      case CubeDataType::UInt16: { std::uint16_t v; std::memcpy(&v, p, 2); stored.data[i] = v; break; }
      case CubeDataType::Float32: { float v; std::memcpy(&v, p, 4); stored.data[i] = v; break; }
    }
    if (!std::isfinite(stored.data[i]))
      throw Error(ErrorCode::UnsupportedDataType, "cube contains a non-finite sample");
  }
  return stored.interleave == Interleave::BSQ ? stored : stored.with_interleave(Interleave::BSQ);
}

/// Writes header and raw file in the cube's own interleave.
inline void write_cube(const fs::path& header_path, const fs::path& data_path, const Cube& cube,
                       CubeDataType type = CubeDataType::Float32) {
  if (cube.data.size() != cube.samples * cube.lines * cube.bands)
    throw Error(ErrorCode::SizeMismatch, "cube value count differs from samples*lines*bands");
  std::ostringstream hdr;
  hdr << "ENVI\nsamples = " << cube.samples << "\nlines = " << cube.lines
      << "\nbands = " << cube.bands << "\nheader offset = 0\nfile type = ENVI Standard\n"
      << "data type = " << static_cast<int>(type) << "\ninterleave = " << to_string(cube.interleave)
      << "\nbyte order = 0\n";
  detail::write_all(header_path, hdr.str());

  std::string raw;
  raw.reserve(cube.data.size() * bytes_per_sample(type));
  auto put = [&raw](const auto v) {
    char buf[sizeof(v)];
    std::memcpy(buf, &v, sizeof(v));
    raw.append(buf, sizeof(v));
  };
  for (double v : cube.data) {
    switch (type) {
      case CubeDataType::UInt8: put(static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)))); break;
      case CubeDataType::Int16: put(static_cast<std::int16_t>(std::lround(std::clamp(v, -32768.0, 32767.0)))); break;
      case CubeDataType::UInt16: put(static_cast<std::uint16_t>(std::lround(std::clamp(v, 0.0, 65535.0)))); break;
      case CubeDataType::Float32: put(static_cast<float>(v)); break;
    }
  }
  detail::write_all(data_path, raw);
}

/// bands x (samples*lines); pixel n = line * samples + sample.
inline DataMatrix to_data_matrix(const Cube& cube) {
  DataMatrix x(cube.bands, cube.samples * cube.lines);
  for (std::size_t l = 0; l < cube.lines; ++l)
    for (std::size_t s = 0; s < cube.samples; ++s)
      for (std::size_t b = 0; b < cube.bands; ++b) x(b, l * cube.samples + s) = cube.value(s, l, b);
  return x;
}

inline Cube from_data_matrix(const DataMatrix& x, std::size_t samples, std::size_t lines) {
  if (x.cols() != samples * lines)
    throw Error(ErrorCode::SizeMismatch, "pixel count differs from samples*lines");
  Cube c{samples, lines, x.rows(), Interleave::BSQ, std::vector<double>(x.size())};
  for (std::size_t l = 0; l < lines; ++l)
    for (std::size_t s = 0; s < samples; ++s)
      for (std::size_t b = 0; b < x.rows(); ++b) c.data[c.index(s, l, b)] = x(b, l * samples + s);
  return c;
}

// ---- CSV ----------------------------------------------------------------------

/// One matrix row per line, comma separated, 17 significant digits.
inline std::string format_csv(const Matrix& m) {
  std::string out;
  char buf[32];
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out.push_back(',');
      const int n = std::snprintf(buf, sizeof buf, "%.17g", m(i, j));
      out.append(buf, static_cast<std::size_t>(n));
    }
    out.push_back('\n');
  }
  return out;
}

inline Matrix parse_csv(std::string_view text) {
  std::vector<std::vector<double>> rows;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string line = detail::trim(text.substr(pos, eol - pos));
    ++line_no;
    pos = eol + 1;
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t f = 0;
    while (true) {
      const auto comma = line.find(',', f);
      std::string field = detail::trim(std::string_view(line).substr(f, comma == std::string::npos ? std::string::npos : comma - f));
      if (field.size() >= 2 && field.front() == '"' && field.back() == '"')
        field = field.substr(1, field.size() - 2);
      double v = 0.0;
      if (!detail::parse_number(field, v) || !std::isfinite(v))
        throw Error(ErrorCode::Validation,
                    "CSV line " + std::to_string(line_no) + ": '" + field + "' is not a finite number");
      row.push_back(v);
      if (comma == std::string::npos) break;
      f = comma + 1;
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw Error(ErrorCode::ShapeMismatch, "CSV line " + std::to_string(line_no) + " is ragged");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) return {};
  Matrix m(rows.size(), rows.front().size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(i, j) = rows[i][j];
  return m;
}

inline void write_csv(const fs::path& path, const Matrix& m) { detail::write_all(path, format_csv(m)); }

inline Matrix read_csv(const fs::path& path) {
  const std::vector<char> bytes = detail::read_all(path);
  return parse_csv(std::string_view(bytes.data(), bytes.size()));
}

/// Tensor as L frontal slices stacked vertically: an (L*L) x L matrix.
inline Matrix tensor_to_stacked_slices(const Tensor3& t) {
  const std::size_t L = t.dim();
  Matrix m(L * L, L);
  for (std::size_t k = 0; k < L; ++k)
    for (std::size_t j = 0; j < L; ++j)
      for (std::size_t i = 0; i < L; ++i) m(k * L + i, j) = t(i, j, k);
  return m;
}

inline Tensor3 tensor_from_stacked_slices(const Matrix& m) {
  const std::size_t L = m.cols();
  if (L == 0 || m.rows() != L * L)
    throw Error(ErrorCode::ShapeMismatch, "tensor CSV must have L*L rows of L values");
  Tensor3 t(L);
  for (std::size_t k = 0; k < L; ++k)
    for (std::size_t j = 0; j < L; ++j)
      for (std::size_t i = 0; i < L; ++i) t(i, j, k) = m(k * L + i, j);
  return t;
}

inline Tensor3 read_tensor_csv(const fs::path& path) { return tensor_from_stacked_slices(read_csv(path)); }

inline void write_tensor_csv(const fs::path& path, const Tensor3& t) {
  write_csv(path, tensor_to_stacked_slices(t));
}

}  // namespace npsa
