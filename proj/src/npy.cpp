// SPDX-License-Identifier: Apache-2.0

#include "quantprune/npy.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

#include "quantprune/errors.hpp"

static_assert(std::endian::native == std::endian::little,
              "little-endian host required for <f4 payload I/O");

namespace quantprune {

namespace {

constexpr char kMagic[6] = {'\x93', 'N', 'U', 'M', 'P', 'Y'};

void skip_spaces(const std::string& text, std::size_t& pos) {
  while (pos < text.size() && text[pos] == ' ') ++pos;
}

// Minimal parser for the python-dict header; strict about the three required
// keys and their value forms, tolerant of key order and trailing commas.
struct Header {
  std::string descr;
  bool fortran_order = false;
  std::vector<std::size_t> shape;
};

Header parse_header(const std::string& text) {
  Header header;
  bool saw_descr = false, saw_order = false, saw_shape = false;

  std::size_t pos = text.find('{');
  if (pos == std::string::npos) {
    throw FormatError("npy header: missing dict opening brace");
  }
  ++pos;
  while (true) {
    skip_spaces(text, pos);
    if (pos >= text.size()) throw FormatError("npy header: truncated dict");
    if (text[pos] == '}') break;
    if (text[pos] == ',') {
      ++pos;
      continue;
    }
    if (text[pos] != '\'') {
      throw FormatError("npy header: expected quoted key");
    }
    std::size_t key_end = text.find('\'', pos + 1);
    if (key_end == std::string::npos) {
      throw FormatError("npy header: unterminated key");
    }
    std::string key = text.substr(pos + 1, key_end - pos - 1);
    pos = key_end + 1;
    skip_spaces(text, pos);
    if (pos >= text.size() || text[pos] != ':') {
      throw FormatError("npy header: missing ':' after key '" + key + "'");
    }
    ++pos;
    skip_spaces(text, pos);

    if (key == "descr") {
      if (pos >= text.size() || text[pos] != '\'') {
        throw FormatError("npy header: descr must be a quoted string");
      }
      std::size_t end = text.find('\'', pos + 1);
      if (end == std::string::npos) {
        throw FormatError("npy header: unterminated descr");
      }
      header.descr = text.substr(pos + 1, end - pos - 1);
      pos = end + 1;
      saw_descr = true;
    } else if (key == "fortran_order") {
      if (text.compare(pos, 4, "True") == 0) {
        header.fortran_order = true;
        pos += 4;
      } else if (text.compare(pos, 5, "False") == 0) {
        header.fortran_order = false;
        pos += 5;
      } else {
        throw FormatError("npy header: fortran_order must be True or False");
      }
      saw_order = true;
    } else if (key == "shape") {
      if (pos >= text.size() || text[pos] != '(') {
        throw FormatError("npy header: shape must be a tuple");
      }
      ++pos;
      while (true) {
        skip_spaces(text, pos);
        if (pos >= text.size()) {
          throw FormatError("npy header: unterminated shape tuple");
        }
        if (text[pos] == ')') {
          ++pos;
          break;
        }
        if (text[pos] == ',') {
          ++pos;
          continue;
        }
        if (!std::isdigit(static_cast<unsigned char>(text[pos]))) {
          throw FormatError("npy header: shape entries must be integers");
        }
        std::size_t digits = 0;
        unsigned long long value = 0;
        try {
          value = std::stoull(text.substr(pos), &digits);
        } catch (const std::exception&) {
          throw FormatError("npy header: shape entry out of range");
        }
        header.shape.push_back(static_cast<std::size_t>(value));
        pos += digits;
      }
      saw_shape = true;
    } else {
      throw FormatError("npy header: unexpected key '" + key + "'");
    }
  }
  if (!saw_descr) throw FormatError("npy header: missing descr");
  if (!saw_order) throw FormatError("npy header: missing fortran_order");
  if (!saw_shape) throw FormatError("npy header: missing shape");
  return header;
}

std::string build_header(const std::vector<std::size_t>& shape) {
  std::ostringstream dict;
  dict << "{'descr': '<f4', 'fortran_order': False, 'shape': (";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    dict << shape[i];
    if (shape.size() == 1 || i + 1 < shape.size()) dict << ",";
    if (i + 1 < shape.size()) dict << " ";
  }
  dict << "), }";
  std::string text = dict.str();
  // 6-byte magic + 2-byte version + 2-byte length + text + padding + '\n'
  // must total a multiple of 64.
  std::size_t unpadded = 10 + text.size() + 1;
  std::size_t padding = (64 - unpadded % 64) % 64;
  text.append(padding, ' ');
  text.push_back('\n');
  return text;
}

void write_payload(const std::vector<std::size_t>& shape,
                   std::span<const double> values,
                   const std::filesystem::path& path) {
  std::size_t count = 1;
  for (std::size_t dim : shape) count *= dim;
  if (count == 0) {
    throw DataError("refusing to write an empty tensor to " + path.string());
  }
  if (count != values.size()) {
    throw DataError("tensor shape does not cover the payload");
  }

  std::string header = build_header(shape);
  auto header_len = static_cast<std::uint16_t>(header.size());

  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(kMagic, sizeof(kMagic));
    out.put('\x01');
    out.put('\x00');
    char len_bytes[2] = {static_cast<char>(header_len & 0xff),
                         static_cast<char>((header_len >> 8) & 0xff)};
    out.write(len_bytes, 2);
    out.write(header.data(), static_cast<std::streamsize>(header.size()));
    std::vector<float> payload(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      payload[i] = static_cast<float>(values[i]);
    }
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size() * sizeof(float)));
    if (!out) throw IoError("failed while writing " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw IoError("cannot move " + tmp.string() + " into place: " +
                  ec.message());
  }
}

}  // namespace

Tensor read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());

  char magic[6];
  in.read(magic, 6);
  if (!in || std::memcmp(magic, kMagic, 6) != 0) {
    throw FormatError(path.string() + ": bad magic, not an NPY file");
  }
  char version[2];
  in.read(version, 2);
  if (!in || version[0] != 1 || version[1] != 0) {
    throw FormatError(path.string() + ": unsupported NPY version " +
                      std::to_string(static_cast<int>(version[0])) + "." +
                      std::to_string(static_cast<int>(version[1])) +
                      " (need 1.0)");
  }
  unsigned char len_bytes[2];
  in.read(reinterpret_cast<char*>(len_bytes), 2);
  if (!in) throw FormatError(path.string() + ": truncated header length");
  std::size_t header_len = len_bytes[0] | (len_bytes[1] << 8);

  std::string header_text(header_len, '\0');
  in.read(header_text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw FormatError(path.string() + ": truncated header");

  Header header = parse_header(header_text);
  if (header.descr != "<f4") {
    throw FormatError(path.string() + ": dtype descr '" + header.descr +
                      "' unsupported (need '<f4')");
  }
  if (header.fortran_order) {
    throw FormatError(path.string() +
                      ": fortran_order layout unsupported (need C order)");
  }
  if (header.shape.empty() || header.shape.size() > 2) {
    throw FormatError(path.string() + ": unsupported shape rank " +
                      std::to_string(header.shape.size()) +
                      " (need 1-D or 2-D)");
  }
  std::size_t count = 1;
  for (std::size_t dim : header.shape) {
    if (dim == 0) {
      throw FormatError(path.string() + ": zero-sized shape dimension");
    }
    count *= dim;
  }

  std::vector<float> payload(count);
  in.read(reinterpret_cast<char*>(payload.data()),
          static_cast<std::streamsize>(count * sizeof(float)));
  if (!in) throw FormatError(path.string() + ": truncated payload");

  Tensor tensor;
  tensor.shape = header.shape;
  tensor.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    tensor.values[i] = static_cast<double>(payload[i]);
  }
  return tensor;
}

void write_tensor(const Matrix& matrix, const std::filesystem::path& path) {
  write_payload({matrix.rows(), matrix.cols()}, matrix.values(), path);
}

void write_tensor(std::span<const double> vector,
                  const std::filesystem::path& path) {
  write_payload({vector.size()}, vector, path);
}

Matrix tensor_to_matrix(const Tensor& tensor) {
  return Matrix(tensor.rows(), tensor.cols(), tensor.values);
}

}  // namespace quantprune
