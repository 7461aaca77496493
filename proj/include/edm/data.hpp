#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace edm {

struct FrequencyCell {
  std::int64_t value;
  std::int64_t count;

  friend bool operator==(const FrequencyCell&, const FrequencyCell&) = default;
};

/// Observed counts per non-negative integer value, sorted by value.
class FrequencyTable {
 public:
  /// Cells may arrive in any order; throws DuplicateValue, NegativeCount,
  /// InvalidArgument (negative value) or EmptyData (total count zero).
  explicit FrequencyTable(std::vector<FrequencyCell> cells);

  const std::vector<FrequencyCell>& cells() const noexcept { return cells_; }
  std::int64_t total() const noexcept { return total_; }
  std::int64_t max_value() const noexcept { return cells_.back().value; }
  /// Count at `value`, zero when the value is absent.
  std::int64_t count_at(std::int64_t value) const;
  /// Counts for 0..max_value(), zero-filled.
  std::vector<double> dense_counts() const;

  /// Same table with every count multiplied by `factor`.
  FrequencyTable scaled(std::int64_t factor) const;

 private:
  std::vector<FrequencyCell> cells_;
  std::int64_t total_ = 0;
};

/// Parses `value,frequency` CSV text. Header required; blank lines and
/// surrounding whitespace are ignored. Errors carry the 1-based line.
FrequencyTable parse_frequency_csv(std::string_view text);
FrequencyTable read_frequency_csv(const std::filesystem::path& path);

double sample_mean(const FrequencyTable& data);
/// N-1 denominator.
double sample_variance(const FrequencyTable& data);

}  // namespace edm
