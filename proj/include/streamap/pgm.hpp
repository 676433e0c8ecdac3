// Copyright 2026 The streamap Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef STREAMAP_PGM_HPP_
#define STREAMAP_PGM_HPP_

#include <algorithm>
#include <cctype>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <string>

#include "streamap/augment.hpp"
#include "streamap/error.hpp"

namespace streamap::augment {

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& in) {
  std::string tok;
  char ch = 0;
  while (in.get(ch)) {
    if (ch == '#') {
      std::string rest;
      std::getline(in, rest);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(ch))) {
      if (!tok.empty()) break;
      continue;
    }
    tok.push_back(ch);
  }
  return tok;
}

inline int pgm_int(std::istream& in) {
  const std::string tok = pgm_token(in);
  try {
    std::size_t used = 0;
    const int v = std::stoi(tok, &used);
    if (used == tok.size()) return v;
  } catch (const std::logic_error&) {
  }
  fail(ErrorKind::kMalformedInput, "PGM: bad header value '" + tok + "'");
}

}  // namespace detail

// Reads binary (P5) or ASCII (P2) graymaps with maxval <= 255.
inline PixelGrid read_pgm(std::istream& in) {
  const std::string magic = detail::pgm_token(in);
  require(magic == "P5" || magic == "P2", ErrorKind::kMalformedInput,
          "PGM: unsupported magic '" + magic + "'");
  const int w = detail::pgm_int(in);
  const int h = detail::pgm_int(in);
  const int maxval = detail::pgm_int(in);
  require(w > 0 && h > 0 && maxval > 0 && maxval <= 255, ErrorKind::kMalformedInput,
          "PGM: bad dimensions or maxval");
  PixelGrid g(w, h);
  for (double& v : g.values) {
    if (magic == "P5") {
      char byte = 0;
      require(static_cast<bool>(in.get(byte)), ErrorKind::kMalformedInput, "PGM: truncated data");
      v = static_cast<double>(static_cast<unsigned char>(byte));
    } else {
      v = detail::pgm_int(in);
    }
  }
  return g;
}

inline PixelGrid load_pgm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kMalformedInput, "cannot open " + path.string());
  return read_pgm(in);
}

// Writes P5, rounding and clamping each value to [0, 255].
inline void write_pgm(std::ostream& out, const PixelGrid& g) {
  out << "P5\n" << g.width << ' ' << g.height << "\n255\n";
  for (double v : g.values) {
    out.put(static_cast<char>(static_cast<unsigned char>(std::clamp(std::lround(v), 0L, 255L))));
  }
}

inline void save_pgm(const std::filesystem::path& path, const PixelGrid& g) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::kMalformedInput, "cannot write " + path.string());
  write_pgm(out, g);
}

}  // namespace streamap::augment

#endif  // STREAMAP_PGM_HPP_
