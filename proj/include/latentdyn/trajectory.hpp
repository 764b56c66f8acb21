#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace latentdyn {

/// Time-ordered sequence of d-dimensional activation vectors.
///
/// Row n is the state at generation step n; storage is row-major.
/// A trajectory may be empty only transiently (for example, a trace with no
/// iterates); the file writers reject empty trajectories.
class Trajectory {
 public:
  using Meta = std::map<std::string, std::string>;

  Trajectory() = default;
  Trajectory(std::size_t steps, std::size_t dim);
  Trajectory(std::size_t steps, std::size_t dim, std::vector<double> data, Meta meta = {});

  std::size_t steps() const noexcept { return steps_; }
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return steps_ == 0; }

  std::span<const double> row(std::size_t n) const { return {data_.data() + n * dim_, dim_}; }
  std::span<double> row(std::size_t n) { return {data_.data() + n * dim_, dim_}; }
  double operator()(std::size_t n, std::size_t j) const { return data_[n * dim_ + j]; }
  double& operator()(std::size_t n, std::size_t j) { return data_[n * dim_ + j]; }

  const std::vector<double>& data() const noexcept { return data_; }
  const Meta& meta() const noexcept { return meta_; }
  Meta& meta() noexcept { return meta_; }

  void append_row(std::span<const double> values);
  /// Values of column j as a series over time.
  std::vector<double> column(std::size_t j) const;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;

 private:
  std::size_t steps_ = 0;
  std::size_t dim_ = 0;
  std::vector<double> data_;
  Meta meta_;
};

enum class Dtype : std::uint8_t { F32 = 0, F64 = 1 };

/// LST1 layout (little-endian):
///   0..3   magic "LST1"
///   4..7   N (u32)
///   8..11  d (u32)
///   12     dtype (0 = f32, 1 = f64)
///   13..15 reserved, zero
///   16..   N*d payload values, row-major
///   then   u32 meta length M, followed by M bytes of "key=value\n" lines
inline constexpr std::size_t kLstHeaderSize = 16;

Trajectory load_trajectory(const std::filesystem::path& path);
/// Parses an in-memory LST1 image; errors report byte offsets.
Trajectory parse_trajectory(std::span<const std::uint8_t> bytes);

void save_trajectory(const Trajectory& t, const std::filesystem::path& path, Dtype dtype = Dtype::F64);
std::vector<std::uint8_t> serialize_trajectory(const Trajectory& t, Dtype dtype = Dtype::F64);

/// Rectangular numeric CSV, ',' separated, '.' decimal, no header row.
Trajectory load_csv(const std::filesystem::path& path);
Trajectory parse_csv(std::string_view text);

/// Dispatches on extension: ".csv" goes through load_csv, anything else is LST1.
Trajectory load_any(const std::filesystem::path& path);

}  // namespace latentdyn
