#include "taskdict/image.hpp"

#include <cmath>
#include <fstream>
#include <vector>

#include "taskdict/errors.hpp"

namespace taskdict {

namespace {

// Next whitespace-delimited token, skipping '#' comments per the PGM spec.
std::string next_token(std::istream& in) {
  std::string tok;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(static_cast<char>(c));
  }
  return tok;
}

}  // namespace

Image read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open image file: " + path);

  const std::string magic = next_token(in);
  if (magic != "P5") throw DataError(path + ": expected binary PGM (P5), got '" + magic + "'");

  const std::string ws = next_token(in);
  const std::string hs = next_token(in);
  const std::string ms = next_token(in);
  long w = 0, h = 0, maxval = 0;
  try {
    w = std::stol(ws);
    h = std::stol(hs);
    maxval = std::stol(ms);
  } catch (const std::exception&) {
    throw DataError(path + ": malformed PGM header");
  }
  if (w < 1 || h < 1) throw DataError(path + ": bad image dimensions");
  if (maxval != 255) throw DataError(path + ": only maxval 255 is supported");

  std::vector<unsigned char> raw(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
  in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (in.gcount() != static_cast<std::streamsize>(raw.size())) {
    throw DataError(path + ": truncated pixel data");
  }

  Image img(h, w);
  for (long r = 0; r < h; ++r) {
    for (long c = 0; c < w; ++c) {
      img.pix(r, c) = raw[static_cast<std::size_t>(r * w + c)] / 255.0;
    }
  }
  return img;
}

void write_pgm(const Image& image, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write image file: " + path);
  const Index h = image.height();
  const Index w = image.width();
  out << "P5\n" << w << " " << h << "\n255\n";
  std::vector<unsigned char> raw(static_cast<std::size_t>(h) * static_cast<std::size_t>(w));
  for (Index r = 0; r < h; ++r) {
    for (Index c = 0; c < w; ++c) {
      const double v = std::min(1.0, std::max(0.0, image.pix(r, c)));
      raw[static_cast<std::size_t>(r * w + c)] =
          static_cast<unsigned char>(std::lround(v * 255.0));
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw DataError("failed writing image file: " + path);
}

}  // namespace taskdict
