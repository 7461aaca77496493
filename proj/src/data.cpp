#include "edm/data.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>

#include "edm/errors.hpp"

namespace edm {

FrequencyTable::FrequencyTable(std::vector<FrequencyCell> cells)
    : cells_(std::move(cells)) {
  std::sort(cells_.begin(), cells_.end(),
            [](const auto& a, const auto& b) { return a.value < b.value; });
  for (std::size_t i = 0; i < cells_.size(); ++i) {
    const auto& c = cells_[i];
    if (c.value < 0) {
      throw Error(ErrorCode::InvalidArgument,
                  "negative value " + std::to_string(c.value));
    }
    if (c.count < 0) {
      throw Error(ErrorCode::NegativeCount, "negative count " +
                                                std::to_string(c.count) +
                                                " at value " + std::to_string(c.value));
    }
    if (i > 0 && cells_[i - 1].value == c.value) {
      throw Error(ErrorCode::DuplicateValue,
                  "value " + std::to_string(c.value) + " appears twice");
    }
    total_ += c.count;
  }
  if (total_ <= 0) throw Error(ErrorCode::EmptyData, "no observations");
}

std::int64_t FrequencyTable::count_at(std::int64_t value) const {
  auto it = std::lower_bound(
      cells_.begin(), cells_.end(), value,
      [](const FrequencyCell& c, std::int64_t v) { return c.value < v; });
  return (it != cells_.end() && it->value == value) ? it->count : 0;
}

std::vector<double> FrequencyTable::dense_counts() const {
  std::vector<double> out(static_cast<std::size_t>(max_value()) + 1, 0.0);
  for (const auto& c : cells_) out[static_cast<std::size_t>(c.value)] += c.count;
  return out;
}

FrequencyTable FrequencyTable::scaled(std::int64_t factor) const {
  std::vector<FrequencyCell> cells = cells_;
  for (auto& c : cells) c.count *= factor;
  return FrequencyTable(std::move(cells));
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::int64_t parse_int(std::string_view field, std::size_t line) {
  field = trim(field);
  std::int64_t v = 0;
  const auto* end = field.data() + field.size();
  auto [ptr, ec] = std::from_chars(field.data(), end, v);
  if (field.empty() || ec != std::errc() || ptr != end) {
    throw Error(ErrorCode::ParseError, "line " + std::to_string(line) +
                                           ": expected an integer, got '" +
                                           std::string(field) + "'");
  }
  return v;
}

}  // namespace

FrequencyTable parse_frequency_csv(std::string_view text) {
  std::vector<FrequencyCell> cells;
  bool header_seen = false;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    const auto raw = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                   : nl - pos);
    pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
    ++line_no;

    const auto line = trim(raw);
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string_view::npos || line.find(',', comma + 1) != std::string_view::npos) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": expected two fields");
    }
    const auto first = trim(line.substr(0, comma));
    const auto second = trim(line.substr(comma + 1));
    if (!header_seen) {
      if (first != "value" || second != "frequency") {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) +
                                               ": expected header 'value,frequency'");
      }
      header_seen = true;
      continue;
    }
    const auto value = parse_int(first, line_no);
    const auto count = parse_int(second, line_no);
    if (count < 0) {
      throw Error(ErrorCode::NegativeCount, "line " + std::to_string(line_no) +
                                                ": negative frequency");
    }
    if (value < 0) {
      throw Error(ErrorCode::ParseError,
                  "line " + std::to_string(line_no) + ": negative value");
    }
    cells.push_back({value, count});
  }
  if (!header_seen) throw Error(ErrorCode::ParseError, "missing header 'value,frequency'");
  if (cells.empty()) throw Error(ErrorCode::EmptyData, "no data rows");
  return FrequencyTable(std::move(cells));
}

FrequencyTable read_frequency_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_frequency_csv(buf.str());
}

double sample_mean(const FrequencyTable& data) {
  double s = 0.0;
  for (const auto& c : data.cells()) s += static_cast<double>(c.value) * c.count;
  return s / static_cast<double>(data.total());
}

double sample_variance(const FrequencyTable& data) {
  const auto n = data.total();
  if (n < 2) throw Error(ErrorCode::EmptyData, "variance needs at least two observations");
  const double mean = sample_mean(data);
  double s = 0.0;
  for (const auto& c : data.cells()) {
    const double d = static_cast<double>(c.value) - mean;
    s += d * d * c.count;
  }
  return s / static_cast<double>(n - 1);
}

}  // namespace edm
