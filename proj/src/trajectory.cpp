#include "latentdyn/trajectory.hpp"

#include <bit>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>

#include "latentdyn/error.hpp"

namespace latentdyn {

Trajectory::Trajectory(std::size_t steps, std::size_t dim)
    : steps_(steps), dim_(dim), data_(steps * dim, 0.0) {}

Trajectory::Trajectory(std::size_t steps, std::size_t dim, std::vector<double> data, Meta meta)
    : steps_(steps), dim_(dim), data_(std::move(data)), meta_(std::move(meta)) {
  if (data_.size() != steps_ * dim_) {
    fail(ErrorCode::DimensionMismatch, "trajectory data has " + std::to_string(data_.size()) +
                                           " values, expected " + std::to_string(steps_ * dim_));
  }
}

void Trajectory::append_row(std::span<const double> values) {
  if (steps_ == 0 && dim_ == 0) dim_ = values.size();
  if (values.size() != dim_) {
    fail(ErrorCode::DimensionMismatch,
         "row of length " + std::to_string(values.size()) + " appended to dim " + std::to_string(dim_));
  }
  data_.insert(data_.end(), values.begin(), values.end());
  ++steps_;
}

std::vector<double> Trajectory::column(std::size_t j) const {
  if (j >= dim_) fail(ErrorCode::DimensionMismatch, "column " + std::to_string(j) + " out of range");
  std::vector<double> out(steps_);
  for (std::size_t n = 0; n < steps_; ++n) out[n] = data_[n * dim_ + j];
  return out;
}

namespace {

std::uint32_t read_u32(std::span<const std::uint8_t> b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | (static_cast<std::uint32_t>(b[off + 1]) << 8) |
         (static_cast<std::uint32_t>(b[off + 2]) << 16) | (static_cast<std::uint32_t>(b[off + 3]) << 24);
}

std::uint64_t read_u64(std::span<const std::uint8_t> b, std::size_t off) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[off + static_cast<std::size_t>(i)];
  return v;
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::string at(std::size_t offset) { return "at byte offset " + std::to_string(offset); }

void validate_meta(const Trajectory::Meta& meta) {
  for (const auto& [key, value] : meta) {
    if (key.empty() || key.find_first_of("=\n") != std::string::npos) {
      fail(ErrorCode::Precondition, "meta key '" + key + "' must be nonempty without '=' or newline");
    }
    if (value.find('\n') != std::string::npos) {
      fail(ErrorCode::Precondition, "meta value for '" + key + "' contains a newline");
    }
  }
}

Trajectory::Meta parse_meta(std::string_view text, std::size_t base_offset) {
  Trajectory::Meta meta;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    if (!line.empty()) {
      const std::size_t eq = line.find('=');
      if (eq == std::string_view::npos || eq == 0) {
        fail(ErrorCode::MalformedFile, "meta line without key=value " + at(base_offset + pos));
      }
      meta[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 1));
    }
    pos = end + 1;
  }
  return meta;
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    fail(ErrorCode::FileNotFound, path.string() + " not found");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoFailure, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace

Trajectory parse_trajectory(std::span<const std::uint8_t> b) {
  if (b.size() < 4) fail(ErrorCode::TruncatedFile, "file shorter than magic " + at(b.size()));
  if (b[0] != 'L' || b[1] != 'S' || b[2] != 'T' || b[3] != '1') {
    fail(ErrorCode::BadMagic, "expected \"LST1\" " + at(0));
  }
  if (b.size() < kLstHeaderSize) fail(ErrorCode::TruncatedFile, "header incomplete " + at(b.size()));

  const std::uint32_t steps = read_u32(b, 4);
  const std::uint32_t dim = read_u32(b, 8);
  const std::uint8_t dtype = b[12];
  if (dtype > 1) fail(ErrorCode::UnsupportedDtype, "dtype " + std::to_string(dtype) + " " + at(12));
  for (std::size_t i = 13; i < 16; ++i) {
    if (b[i] != 0) fail(ErrorCode::MalformedFile, "reserved byte is nonzero " + at(i));
  }
  if (steps == 0) fail(ErrorCode::MalformedFile, "N must be at least 1 " + at(4));
  if (dim == 0) fail(ErrorCode::MalformedFile, "d must be at least 1 " + at(8));

  const std::size_t width = dtype == 0 ? 4 : 8;
  const std::size_t count = static_cast<std::size_t>(steps) * dim;
  const std::size_t payload_end = kLstHeaderSize + count * width;
  if (b.size() < payload_end) {
    fail(ErrorCode::TruncatedFile, "payload needs " + std::to_string(count * width) + " bytes, file ends " +
                                       at(b.size()));
  }

  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = kLstHeaderSize + i * width;
    const double v = dtype == 0 ? static_cast<double>(std::bit_cast<float>(read_u32(b, off)))
                                : std::bit_cast<double>(read_u64(b, off));
    if (!std::isfinite(v)) fail(ErrorCode::NonFiniteValue, "value " + std::to_string(i) + " " + at(off));
    data[i] = v;
  }

  if (b.size() < payload_end + 4) fail(ErrorCode::TruncatedFile, "meta length missing " + at(b.size()));
  const std::uint32_t meta_len = read_u32(b, payload_end);
  const std::size_t meta_begin = payload_end + 4;
  if (b.size() < meta_begin + meta_len) {
    fail(ErrorCode::TruncatedFile, "meta needs " + std::to_string(meta_len) + " bytes, file ends " + at(b.size()));
  }
  if (b.size() > meta_begin + meta_len) {
    fail(ErrorCode::MalformedFile, "trailing bytes " + at(meta_begin + meta_len));
  }
  const std::string_view meta_text(reinterpret_cast<const char*>(b.data() + meta_begin), meta_len);
  return Trajectory(steps, dim, std::move(data), parse_meta(meta_text, meta_begin));
}

Trajectory load_trajectory(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_trajectory(bytes);
}

std::vector<std::uint8_t> serialize_trajectory(const Trajectory& t, Dtype dtype) {
  if (t.steps() == 0 || t.dim() == 0) fail(ErrorCode::Precondition, "cannot save an empty trajectory");
  if (t.steps() > std::numeric_limits<std::uint32_t>::max() || t.dim() > std::numeric_limits<std::uint32_t>::max()) {
    fail(ErrorCode::Precondition, "trajectory shape exceeds 32-bit header fields");
  }
  for (std::size_t i = 0; i < t.data().size(); ++i) {
    if (!std::isfinite(t.data()[i])) fail(ErrorCode::NonFiniteValue, "value " + std::to_string(i) + " is not finite");
  }
  validate_meta(t.meta());

  std::string meta_text;
  for (const auto& [key, value] : t.meta()) meta_text += key + "=" + value + "\n";

  const std::size_t width = dtype == Dtype::F32 ? 4 : 8;
  std::vector<std::uint8_t> out;
  out.reserve(kLstHeaderSize + t.data().size() * width + 4 + meta_text.size());
  out.insert(out.end(), {'L', 'S', 'T', '1'});
  put_u32(out, static_cast<std::uint32_t>(t.steps()));
  put_u32(out, static_cast<std::uint32_t>(t.dim()));
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.insert(out.end(), {0, 0, 0});
  for (double v : t.data()) {
    if (dtype == Dtype::F32) {
      put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
    } else {
      put_u64(out, std::bit_cast<std::uint64_t>(v));
    }
  }
  put_u32(out, static_cast<std::uint32_t>(meta_text.size()));
  out.insert(out.end(), meta_text.begin(), meta_text.end());
  return out;
}

void save_trajectory(const Trajectory& t, const std::filesystem::path& path, Dtype dtype) {
  const auto bytes = serialize_trajectory(t, dtype);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::IoFailure, "write to " + path.string() + " failed");
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace

Trajectory parse_csv(std::string_view text) {
  std::vector<double> data;
  std::size_t dim = 0;
  std::size_t steps = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) continue;

    std::size_t fields = 0;
    std::size_t fpos = 0;
    for (;;) {
      std::size_t comma = line.find(',', fpos);
      const std::string_view field = trim(line.substr(fpos, comma == std::string_view::npos ? comma : comma - fpos));
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        fail(ErrorCode::ParseFailure, "line " + std::to_string(line_no) + " field " + std::to_string(fields + 1) +
                                          ": '" + std::string(field) + "' is not a number");
      }
      if (!std::isfinite(v)) {
        fail(ErrorCode::NonFiniteValue, "line " + std::to_string(line_no) + " field " + std::to_string(fields + 1));
      }
      data.push_back(v);
      ++fields;
      if (comma == std::string_view::npos) break;
      fpos = comma + 1;
    }
    if (steps == 0) {
      dim = fields;
    } else if (fields != dim) {
      fail(ErrorCode::RaggedRows, "line " + std::to_string(line_no) + " has " + std::to_string(fields) +
                                      " fields, expected " + std::to_string(dim));
    }
    ++steps;
  }
  if (steps == 0) fail(ErrorCode::ParseFailure, "CSV contains no rows");
  return Trajectory(steps, dim, std::move(data));
}

Trajectory load_csv(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return parse_csv(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Trajectory load_any(const std::filesystem::path& path) {
  if (path.extension() == ".csv") return load_csv(path);
  return load_trajectory(path);
}

}  // namespace latentdyn
