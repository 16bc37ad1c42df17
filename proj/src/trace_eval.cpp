#include "cof/trace_eval.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <set>
#include <unordered_map>
#include <unordered_set>

namespace cof {

namespace {

bool is_digit(char c) { return c >= '0' && c <= '9'; }
bool is_alnum(char c) { return std::isalnum(static_cast<unsigned char>(c)) != 0; }
char lower(char c) { return static_cast<char>(std::tolower(static_cast<unsigned char>(c))); }

// Ids longer than 9 digits cannot be real frame positions; the scanner skips
// them instead of overflowing.
constexpr long long kMaxFrameId = 1000000000LL;

struct RefMatch {
  int id = 0;
  std::size_t digits_begin = 0;
  std::size_t digits_end = 0;
};

// One left-to-right pass over the text. A match is: word-boundary "frame"
// (optionally "frames"), an optional single ' ' or '-', then digits.
std::vector<RefMatch> scan_frame_refs(std::string_view text) {
  static constexpr std::string_view kToken = "frame";
  std::vector<RefMatch> matches;
  std::size_t i = 0;
  while (i + kToken.size() < text.size() + 1) {
    if (i > 0 && is_alnum(text[i - 1])) {
      ++i;
      continue;
    }
    bool token_here = true;
    for (std::size_t k = 0; k < kToken.size(); ++k) {
      if (lower(text[i + k]) != kToken[k]) {
        token_here = false;
        break;
      }
    }
    if (!token_here) {
      ++i;
      continue;
    }
    std::size_t p = i + kToken.size();
    if (p < text.size() && lower(text[p]) == 's') ++p;
    if (p < text.size() && (text[p] == ' ' || text[p] == '-')) ++p;
    std::size_t digits_begin = p;
    long long value = 0;
    bool overflow = false;
    while (p < text.size() && is_digit(text[p])) {
      value = value * 10 + (text[p] - '0');
      if (value > kMaxFrameId) overflow = true;
      ++p;
    }
    if (p > digits_begin && !overflow && value >= 1) {
      matches.push_back({static_cast<int>(value), digits_begin, p});
      i = p;
    } else {
      ++i;
    }
  }
  return matches;
}

}  // namespace

std::vector<int> extract_frame_refs(std::string_view text) {
  std::vector<int> out;
  std::unordered_set<int> seen;
  for (const auto& m : scan_frame_refs(text)) {
    if (seen.insert(m.id).second) out.push_back(m.id);
  }
  return out;
}

std::size_t histogram_bin(std::size_t distinct_refs) {
  return std::min<std::size_t>(distinct_refs, kHistogramBins - 1);
}

const char* histogram_bin_label(std::size_t bin) {
  static constexpr std::array<const char*, kHistogramBins> labels = {
      "0", "1", "2", "3", "4", "5", "6", "7", "8", "9", "10", "11+"};
  return labels[bin];
}

const char* to_string(TaskKind k) {
  switch (k) {
    case TaskKind::multiple_choice: return "multiple_choice";
    case TaskKind::binary_yes_no: return "binary_yes_no";
    case TaskKind::numeric: return "numeric";
  }
  return "unknown";
}

TaskKind task_kind_from_string(const std::string& s) {
  if (s == "multiple_choice") return TaskKind::multiple_choice;
  if (s == "binary_yes_no") return TaskKind::binary_yes_no;
  if (s == "numeric") return TaskKind::numeric;
  throw std::invalid_argument("unknown task kind: '" + s + "'");
}

namespace {

bool standalone_at(std::string_view text, std::size_t pos, std::size_t len) {
  if (pos > 0 && is_alnum(text[pos - 1])) return false;
  const std::size_t after = pos + len;
  if (after < text.size() && is_alnum(text[after])) return false;
  return true;
}

// First standalone option letter (either case) at or after `from`.
std::optional<char> option_letter_after(std::string_view line, std::size_t from,
                                        std::size_t n_options) {
  for (std::size_t i = from; i < line.size(); ++i) {
    const char up = static_cast<char>(std::toupper(static_cast<unsigned char>(line[i])));
    if (up >= 'A' && up < static_cast<char>('A' + n_options) && standalone_at(line, i, 1)) {
      return up;
    }
  }
  return std::nullopt;
}

std::size_t find_ci(std::string_view hay, std::string_view needle, std::size_t from) {
  if (needle.empty() || hay.size() < needle.size()) return std::string_view::npos;
  for (std::size_t i = from; i + needle.size() <= hay.size(); ++i) {
    bool hit = true;
    for (std::size_t k = 0; k < needle.size(); ++k) {
      if (lower(hay[i + k]) != lower(needle[k])) {
        hit = false;
        break;
      }
    }
    if (hit) return i;
  }
  return std::string_view::npos;
}

std::optional<ExtractedAnswer> extract_choice(std::string_view raw, std::size_t n_options) {
  std::optional<char> from_answer_line;
  std::size_t line_start = 0;
  while (line_start <= raw.size()) {
    std::size_t line_end = raw.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = raw.size();
    std::string_view line = raw.substr(line_start, line_end - line_start);
    const std::size_t ans = find_ci(line, "answer", 0);
    if (ans != std::string_view::npos) {
      if (auto letter = option_letter_after(line, ans + 6, n_options)) {
        from_answer_line = *letter;  // later lines override earlier ones
      }
    }
    if (line_end == raw.size()) break;
    line_start = line_end + 1;
  }
  if (from_answer_line) {
    ExtractedAnswer a;
    a.label = std::string(1, *from_answer_line);
    return a;
  }
  // Fallback: last standalone upper-case option letter anywhere.
  std::optional<char> last;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const char c = raw[i];
    if (c >= 'A' && c < static_cast<char>('A' + n_options) && standalone_at(raw, i, 1)) {
      last = c;
    }
  }
  if (!last) return std::nullopt;
  ExtractedAnswer a;
  a.label = std::string(1, *last);
  return a;
}

std::optional<ExtractedAnswer> extract_binary(std::string_view raw) {
  std::optional<bool> last;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (lower(raw[i]) == 'y' && i + 3 <= raw.size() && lower(raw[i + 1]) == 'e' &&
        lower(raw[i + 2]) == 's' && standalone_at(raw, i, 3)) {
      last = true;
    } else if (lower(raw[i]) == 'n' && i + 2 <= raw.size() && lower(raw[i + 1]) == 'o' &&
               standalone_at(raw, i, 2)) {
      last = false;
    }
  }
  if (!last) return std::nullopt;
  ExtractedAnswer a;
  a.yes = *last;
  return a;
}

std::optional<ExtractedAnswer> extract_numeric(std::string_view raw) {
  const auto refs = scan_frame_refs(raw);
  auto inside_ref = [&](std::size_t begin, std::size_t end) {
    for (const auto& m : refs) {
      if (begin < m.digits_end && end > m.digits_begin) return true;
    }
    return false;
  };
  std::optional<double> last;
  std::size_t i = 0;
  while (i < raw.size()) {
    if (!is_digit(raw[i])) {
      ++i;
      continue;
    }
    if (i > 0 && (is_alnum(raw[i - 1]) || raw[i - 1] == '.')) {
      while (i < raw.size() && is_digit(raw[i])) ++i;
      continue;
    }
    std::size_t begin = i;
    bool negative = begin > 0 && raw[begin - 1] == '-' && !(begin > 1 && is_alnum(raw[begin - 2]));
    while (i < raw.size() && is_digit(raw[i])) ++i;
    if (i < raw.size() && raw[i] == '.' && i + 1 < raw.size() && is_digit(raw[i + 1])) {
      ++i;
      while (i < raw.size() && is_digit(raw[i])) ++i;
    }
    if (!inside_ref(begin, i)) {
      const std::string token(raw.substr(begin, i - begin));
      double value = std::stod(token);
      last = negative ? -value : value;
    }
  }
  if (!last) return std::nullopt;
  ExtractedAnswer a;
  a.number = *last;
  return a;
}

}  // namespace

std::optional<ExtractedAnswer> extract_answer(std::string_view raw_text, TaskKind kind,
                                              std::size_t n_options) {
  switch (kind) {
    case TaskKind::multiple_choice: return extract_choice(raw_text, n_options);
    case TaskKind::binary_yes_no: return extract_binary(raw_text);
    case TaskKind::numeric: return extract_numeric(raw_text);
  }
  return std::nullopt;
}

double mra(double pred, double gold) {
  if (gold == 0.0) throw ZeroGold();
  const double rel = std::fabs(pred - gold) / gold;
  int passed = 0;
  for (int k = 0; k < 10; ++k) {
    const double theta = static_cast<double>(50 + 5 * k) / 100.0;
    if (rel < 1.0 - theta) ++passed;
  }
  return static_cast<double>(passed) / 10.0;
}

MetricReport score(const std::vector<EvalTask>& tasks, const std::vector<Prediction>& predictions) {
  std::unordered_map<std::string, const EvalTask*> by_id;
  for (const auto& t : tasks) by_id.emplace(t.task_id, &t);

  std::unordered_map<std::string, const Prediction*> pred_by_task;
  for (const auto& p : predictions) {
    if (by_id.find(p.task_id) == by_id.end()) throw UnknownTask(p.task_id);
    pred_by_task[p.task_id] = &p;  // a later prediction replaces an earlier one
  }

  MetricReport report;
  report.n_tasks = tasks.size();
  report.n_predictions = predictions.size();
  report.histogram = reference_histogram(predictions);

  std::map<std::string, std::pair<double, std::size_t>> kind_acc;
  for (const auto& task : tasks) {
    auto& split = report.splits[task.split];
    split.n_tasks += 1;
    double task_score = 0.0;
    const auto pit = pred_by_task.find(task.task_id);
    if (pit == pred_by_task.end()) {
      split.n_missing += 1;
      report.n_missing += 1;
    } else {
      const auto answer = extract_answer(pit->second->raw_text, task.kind,
                                         std::max<std::size_t>(task.options.size(), 1));
      if (!answer) {
        split.n_no_answer += 1;
        report.n_no_answer += 1;
      } else {
        switch (task.kind) {
          case TaskKind::multiple_choice: {
            std::string gold = task.gold_label;
            std::transform(gold.begin(), gold.end(), gold.begin(),
                           [](unsigned char c) { return std::toupper(c); });
            task_score = (answer->label == gold) ? 1.0 : 0.0;
            break;
          }
          case TaskKind::binary_yes_no: {
            const bool gold_yes = (task.gold_label == "yes" || task.gold_label == "Yes");
            task_score = (answer->yes == gold_yes) ? 1.0 : 0.0;
            break;
          }
          case TaskKind::numeric:
            task_score = mra(answer->number, task.gold_number);
            break;
        }
      }
    }
    split.score += task_score;
    auto& acc = kind_acc[to_string(task.kind)];
    acc.first += task_score;
    acc.second += 1;
  }

  double split_sum = 0.0;
  for (auto& [name, split] : report.splits) {
    if (split.n_tasks > 0) split.score /= static_cast<double>(split.n_tasks);
    split_sum += split.score;
  }
  report.overall = report.splits.empty() ? 0.0 : split_sum / static_cast<double>(report.splits.size());
  for (const auto& [kind, acc] : kind_acc) {
    report.per_kind[kind] = acc.second ? acc.first / static_cast<double>(acc.second) : 0.0;
  }
  return report;
}

std::vector<std::size_t> reference_histogram(const std::vector<Prediction>& predictions) {
  std::vector<std::size_t> bins(kHistogramBins, 0);
  for (const auto& p : predictions) {
    bins[histogram_bin(extract_frame_refs(p.raw_text).size())] += 1;
  }
  return bins;
}

}  // namespace cof
