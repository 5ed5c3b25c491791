#pragma once

#include <cctype>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <string>

#include "atreg/linalg.hpp"

namespace atreg {

/// Grayscale image with pixels normalized to [0, 1], row-major.
struct PgmImage {
  std::size_t rows = 0;
  std::size_t cols = 0;
  Vector pixels;
};

namespace detail {

// Reads the next header token, skipping whitespace and '#' comments.
inline std::string next_pgm_token(std::istream& in) {
  std::string tok;
  int c = in.get();
  while (c != EOF) {
    if (c == '#') {
      while (c != EOF && c != '\n') c = in.get();
    } else if (std::isspace(c)) {
      c = in.get();
    } else {
      break;
    }
  }
  while (c != EOF && !std::isspace(c)) {
    tok.push_back(static_cast<char>(c));
    c = in.get();
  }
  return tok;
}

inline std::size_t parse_pgm_size(const std::string& tok, const char* what) {
  if (tok.empty()) throw FormatError(std::string("pgm: missing ") + what);
  std::size_t v = 0;
  for (char ch : tok) {
    if (!std::isdigit(static_cast<unsigned char>(ch)))
      throw FormatError(std::string("pgm: malformed ") + what);
    v = v * 10 + static_cast<std::size_t>(ch - '0');
  }
  return v;
}

}  // namespace detail

/// Read a P2 (ASCII) or P5 (binary) PGM with maxval up to 255.
inline PgmImage read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pgm: cannot open " + path);

  const std::string magic = detail::next_pgm_token(in);
  if (magic != "P2" && magic != "P5") throw FormatError("pgm: bad magic '" + magic + "'");

  const std::size_t cols = detail::parse_pgm_size(detail::next_pgm_token(in), "width");
  const std::size_t rows = detail::parse_pgm_size(detail::next_pgm_token(in), "height");
  const std::size_t maxval = detail::parse_pgm_size(detail::next_pgm_token(in), "maxval");
  if (cols == 0 || rows == 0) throw FormatError("pgm: zero dimension");
  if (maxval == 0 || maxval > 255) throw FormatError("pgm: maxval must be in [1, 255]");

  PgmImage img;
  img.rows = rows;
  img.cols = cols;
  img.pixels.resize(rows * cols);

  if (magic == "P5") {
    // The single whitespace after maxval was already consumed by the tokenizer.
    for (std::size_t i = 0; i < rows * cols; ++i) {
      const int c = in.get();
      if (c == EOF) throw FormatError("pgm: truncated pixel data");
      img.pixels[i] = static_cast<double>(c) / static_cast<double>(maxval);
    }
  } else {
    for (std::size_t i = 0; i < rows * cols; ++i) {
      const std::string tok = detail::next_pgm_token(in);
      const std::size_t v = detail::parse_pgm_size(tok, "pixel");
      if (v > maxval) throw FormatError("pgm: pixel exceeds maxval");
      img.pixels[i] = static_cast<double>(v) / static_cast<double>(maxval);
    }
  }
  return img;
}

/// Write a binary P5 PGM with maxval 255; pixels are clamped to [0, 1].
inline void write_pgm(const std::string& path, std::size_t rows, std::size_t cols,
                      const Vector& pixels) {
  if (pixels.size() != rows * cols) throw DimensionMismatch("write_pgm: pixel count mismatch");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("pgm: cannot write " + path);
  out << "P5\n" << cols << " " << rows << "\n255\n";
  for (double v : pixels) {
    const double clamped = std::min(1.0, std::max(0.0, v));
    out.put(static_cast<char>(static_cast<unsigned char>(std::lround(clamped * 255.0))));
  }
  if (!out) throw IoError("pgm: write failed for " + path);
}

inline void write_pgm(const std::string& path, const PgmImage& img) {
  write_pgm(path, img.rows, img.cols, img.pixels);
}

}  // namespace atreg
