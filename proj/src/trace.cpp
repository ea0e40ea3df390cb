#include "elue/trace.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <map>
#include <cmath>
#include <numeric>

#include "elue/error.hpp"

namespace elue {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

// A view into one line that remembers its starting column.
struct Cursor {
  std::string_view text;
  std::size_t column;  // 1-based column of text[0]

  void skip_spaces() {
    std::size_t k = 0;
    while (k < text.size() && (text[k] == ' ' || text[k] == '\r')) ++k;
    advance(k);
  }
  void advance(std::size_t k) {
    text.remove_prefix(k);
    column += k;
  }
  bool empty() const { return text.empty(); }
  char peek() const { return text.front(); }
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

std::int64_t parse_positive(Cursor& cur, std::size_t line) {
  cur.skip_spaces();
  std::int64_t value = 0;
  const auto* begin = cur.text.data();
  const auto [ptr, ec] = std::from_chars(begin, begin + cur.text.size(), value);
  if (ec != std::errc() || ptr == begin) {
    throw ParseError(line, cur.column, "expected a positive integer dimension");
  }
  if (value <= 0) throw ParseError(line, cur.column, "dimensions must be positive");
  cur.advance(static_cast<std::size_t>(ptr - begin));
  cur.skip_spaces();
  return value;
}

TraceStep parse_step(Cursor cur, std::size_t line) {
  cur.skip_spaces();
  if (cur.empty() || cur.peek() != '(') {
    throw ParseError(line, cur.column, "module entry must start with '('");
  }
  cur.advance(1);
  TraceStep step;
  for (;;) {
    step.shape.dims.push_back(parse_positive(cur, line));
    if (cur.empty()) throw ParseError(line, cur.column, "unterminated shape, missing ')'");
    if (cur.peek() == ',') {
      cur.advance(1);
      continue;
    }
    if (cur.peek() == ')') {
      cur.advance(1);
      break;
    }
    throw ParseError(line, cur.column, std::string("unexpected '") + cur.peek() + "' in shape");
  }
  if (step.shape.arity() > 2) {
    throw ParseError(line, cur.column, "shapes have at most two dimensions");
  }
  cur.skip_spaces();
  if (cur.empty() || cur.peek() != ',') {
    throw ParseError(line, cur.column, "expected ',' between shape and module id");
  }
  cur.advance(1);
  cur.skip_spaces();
  auto id = cur.text;
  while (!id.empty() && (id.back() == ' ' || id.back() == '\r')) id.remove_suffix(1);
  if (id.empty()) throw ParseError(line, cur.column, "missing module id");
  for (std::size_t k = 0; k < id.size(); ++k) {
    const char c = id[k];
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-' || c == '.';
    if (!ok) throw ParseError(line, cur.column + k, "illegal character in module id");
  }
  step.module_id = std::string(id);
  return step;
}

Prediction parse_prediction(std::string_view field, std::size_t line, std::size_t column) {
  field = trim(field);
  if (field.empty()) throw ParseError(line, column, "empty pred column");
  const auto* begin = field.data();
  const auto* end = begin + field.size();
  if (field.find_first_of(".eE") == std::string_view::npos) {
    std::int64_t value = 0;
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (ec == std::errc() && ptr == end) return value;
    throw ParseError(line, column, "pred is not an integer or decimal value");
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end || !std::isfinite(value)) {
    throw ParseError(line, column, "pred is not a finite decimal value");
  }
  return value;
}

}  // namespace

double prediction_value(const Prediction& pred) {
  return std::visit([](auto v) { return static_cast<double>(v); }, pred);
}

std::string format_prediction(const Prediction& pred) {
  if (const auto* cls = std::get_if<std::int64_t>(&pred)) return std::to_string(*cls);
  char buf[64];
  const auto [ptr, ec] =
      std::to_chars(buf, buf + sizeof(buf), std::get<double>(pred), std::chars_format::fixed, 6);
  if (ec != std::errc()) throw Error(ErrorCode::kInvalidArgument, "unformattable prediction");
  std::string out(buf, ptr);
  if (out == "-0.000000") out = "0.000000";
  return out;
}

SubmissionFile parse_trace_file(std::string_view text, std::string dataset_id,
                                std::optional<std::string> label) {
  SubmissionFile sub{std::move(dataset_id), {}, std::move(label)};
  bool header_seen = false;
  std::map<std::int64_t, std::size_t> index_line;
  std::size_t line_no = 0;

  while (!text.empty()) {
    const auto nl = text.find('\n');
    auto line = text.substr(0, nl);
    text.remove_prefix(nl == std::string_view::npos ? text.size() : nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (trim(line).empty()) continue;

    // Split on tabs, keeping the starting column of each field.
    std::vector<std::pair<std::string_view, std::size_t>> fields;
    std::size_t start = 0;
    for (;;) {
      const auto tab = line.find('\t', start);
      fields.emplace_back(line.substr(start, tab - start), start + 1);
      if (tab == std::string_view::npos) break;
      start = tab + 1;
    }

    if (!header_seen) {
      if (fields.size() != 3 || trim(fields[0].first) != "index" ||
          trim(fields[1].first) != "pred" || trim(fields[2].first) != "modules") {
        throw ParseError(line_no, 1, "unknown header, expected \"index<TAB>pred<TAB>modules\"");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) {
      throw ParseError(line_no, 1, "expected 3 tab-separated fields, found " +
                                       std::to_string(fields.size()));
    }

    SampleTrace row;
    {
      const auto field = trim(fields[0].first);
      const auto* b = field.data();
      const auto [ptr, ec] = std::from_chars(b, b + field.size(), row.index);
      if (field.empty() || ec != std::errc() || ptr != b + field.size() || row.index < 0) {
        throw ParseError(line_no, fields[0].second, "index must be a non-negative integer");
      }
    }
    row.pred = parse_prediction(fields[1].first, line_no, fields[1].second);

    const auto modules = fields[2].first;
    const auto modules_col = fields[2].second;
    if (trim(modules).empty()) throw ParseError(line_no, modules_col, "empty modules column");
    std::size_t pos = 0;
    for (;;) {
      const auto semi = modules.find(';', pos);
      const auto entry = modules.substr(pos, semi - pos);
      if (trim(entry).empty()) {
        throw ParseError(line_no, modules_col + pos, "empty module entry");
      }
      row.steps.push_back(parse_step(Cursor{entry, modules_col + pos}, line_no));
      if (semi == std::string_view::npos) break;
      pos = semi + 1;
    }

    if (const auto [it, fresh] = index_line.emplace(row.index, line_no); !fresh) {
      throw ParseError(line_no, fields[0].second,
                       "duplicate index " + std::to_string(row.index) + " (first seen on line " +
                           std::to_string(it->second) + ")");
    }
    sub.rows.push_back(std::move(row));
  }

  std::int64_t expected = 0;
  for (const auto& [index, at_line] : index_line) {
    if (index != expected) {
      throw ParseError(at_line, 1, "indices must be contiguous from 0; missing index " +
                                       std::to_string(expected));
    }
    ++expected;
  }
  std::sort(sub.rows.begin(), sub.rows.end(),
            [](const SampleTrace& a, const SampleTrace& b) { return a.index < b.index; });
  return sub;
}

std::string serialize_trace(const SubmissionFile& sub) {
  std::string out(kTraceHeader);
  out += '\n';
  for (const auto& row : sub.rows) {
    out += std::to_string(row.index);
    out += '\t';
    out += format_prediction(row.pred);
    out += '\t';
    for (std::size_t k = 0; k < row.steps.size(); ++k) {
      if (k) out += "; ";
      out += to_string(row.steps[k].shape);
      out += ',';
      out += row.steps[k].module_id;
    }
    out += '\n';
  }
  return out;
}

Flops trace_flops(const SampleTrace& row, const ModelSpec& spec) {
  Flops total = 0;
  for (const auto& step : row.steps) {
    const auto* decl = spec.find(step.module_id);
    if (!decl) {
      throw Error(ErrorCode::kUnknownModule, "row " + std::to_string(row.index) +
                                                 ": unknown module id '" + step.module_id + "'");
    }
    try {
      total += module_flops(*decl, step.shape, spec);
    } catch (const Error& e) {
      throw Error(e.code(), "row " + std::to_string(row.index) + ": " + e.what());
    }
  }
  return total;
}

FlopsSummary submission_flops(const SubmissionFile& sub, const ModelSpec& spec) {
  if (sub.rows.empty()) {
    throw Error(ErrorCode::kEmptySubmission,
                "empty submission" + (sub.dataset_id.empty() ? "" : " for " + sub.dataset_id));
  }
  std::vector<Flops> per_row;
  per_row.reserve(sub.rows.size());
  for (const auto& row : sub.rows) per_row.push_back(trace_flops(row, spec));

  // Integer sum first so the mean does not depend on row order.
  const Flops sum = std::accumulate(per_row.begin(), per_row.end(), Flops{0});
  std::sort(per_row.begin(), per_row.end());
  const auto rank = [&](double q) {
    const auto n = per_row.size();
    auto k = static_cast<std::size_t>(std::ceil(q * static_cast<double>(n)));
    return per_row[std::clamp<std::size_t>(k, 1, n) - 1];
  };
  FlopsSummary summary;
  summary.rows = per_row.size();
  summary.mean = static_cast<double>(sum) / static_cast<double>(per_row.size());
  summary.min = per_row.front();
  summary.max = per_row.back();
  summary.p50 = rank(0.50);
  summary.p90 = rank(0.90);
  summary.p99 = rank(0.99);
  return summary;
}

}  // namespace elue
