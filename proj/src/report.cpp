#include "longdoc/report.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "longdoc/common.hpp"

namespace longdoc {

namespace {

// Half-even rounding to integer tenths, rendered as "<int>.<digit>".
std::string tenths_string(double tenths) {
  auto n = static_cast<long long>(std::nearbyint(tenths));
  return std::to_string(n / 10) + "." + std::to_string(std::llabs(n % 10));
}

std::vector<std::string> column_headers(const MetricReport& metrics) {
  std::vector<std::string> headers = {"Model"};
  if (metrics.is_retrieval()) {
    headers.push_back("MAP");
    headers.push_back("MRR");
    for (const auto& [k, _] : metrics.recall_at)
      headers.push_back("R@" + std::to_string(k));
    for (const auto& [k, _] : metrics.ndcg_at)
      headers.push_back("nDCG@" + std::to_string(k));
  } else {
    headers.insert(headers.end(), {"Micro-F1", "Macro-F1", "Acc.", "AUC"});
  }
  headers.push_back("Len");
  headers.push_back("Tok/s");
  return headers;
}

std::vector<std::string> row_cells(const TableRow& row) {
  std::vector<std::string> cells = {row.model};
  const auto& m = row.metrics;
  if (m.is_retrieval()) {
    cells.push_back(format_percent_1dp(m.map));
    cells.push_back(format_percent_1dp(m.mrr));
    for (const auto& [_, v] : m.recall_at) cells.push_back(format_percent_1dp(v));
    for (const auto& [_, v] : m.ndcg_at) cells.push_back(format_percent_1dp(v));
  } else {
    cells.push_back(format_percent_1dp(m.micro_f1));
    cells.push_back(format_percent_1dp(m.macro_f1));
    cells.push_back(format_percent_1dp(m.accuracy));
    cells.push_back(m.has_auc ? format_percent_1dp(m.auc) : "-");
  }
  cells.push_back(row.context_cap ? std::to_string(*row.context_cap) : "Flex");
  cells.push_back(row.throughput
                      ? format_tokens_per_sec(row.throughput->tokens_per_sec)
                      : "-");
  return cells;
}

}  // namespace

std::string format_percent_1dp(double value) {
  return tenths_string(value * 1000.0);
}

std::string format_tokens_per_sec(double value) {
  return tenths_string(value / 100.0) + "k";
}

RenderedTable emit_table(const std::vector<TableRow>& rows) {
  if (rows.empty()) throw std::runtime_error("cannot emit an empty table");
  const bool retrieval = rows.front().metrics.is_retrieval();
  for (const auto& row : rows)
    if (row.metrics.is_retrieval() != retrieval)
      throw std::runtime_error("table rows mix task kinds");

  auto headers = column_headers(rows.front().metrics);
  std::vector<std::vector<std::string>> body;
  body.reserve(rows.size());
  for (const auto& row : rows) {
    auto cells = row_cells(row);
    if (cells.size() != headers.size())
      throw std::runtime_error("table rows report different metric sets");
    body.push_back(std::move(cells));
  }

  RenderedTable out;
  std::ostringstream csv;
  for (std::size_t i = 0; i < headers.size(); ++i)
    csv << (i ? "," : "") << headers[i];
  csv << "\n";
  for (const auto& cells : body) {
    for (std::size_t i = 0; i < cells.size(); ++i)
      csv << (i ? "," : "") << cells[i];
    csv << "\n";
  }
  out.csv = csv.str();

  std::vector<std::size_t> widths(headers.size());
  for (std::size_t i = 0; i < headers.size(); ++i) widths[i] = headers[i].size();
  for (const auto& cells : body)
    for (std::size_t i = 0; i < cells.size(); ++i)
      widths[i] = std::max(widths[i], cells[i].size());
  std::ostringstream text;
  auto emit_row = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) text << "  ";
      text << cells[i];
      for (std::size_t pad = cells[i].size(); pad < widths[i]; ++pad)
        text << ' ';
    }
    text << "\n";
  };
  emit_row(headers);
  std::size_t total = 0;
  for (std::size_t w : widths) total += w + 2;
  text << std::string(total - 2, '-') << "\n";
  for (const auto& cells : body) emit_row(cells);
  out.text = text.str();
  return out;
}

std::uint64_t file_hash(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot hash missing file: " + path);
  std::uint64_t h = 1469598103934665603ULL;
  char buf[65536];
  while (in.read(buf, sizeof buf) || in.gcount() > 0)
    h = fnv1a64({buf, static_cast<std::size_t>(in.gcount())}, h);
  return h;
}

void RunManifest::set(const std::string& key, const std::string& value) {
  if (key.find('=') != std::string::npos || key.find('\n') != std::string::npos)
    throw std::runtime_error("invalid manifest key: " + key);
  if (value.find('\n') != std::string::npos)
    throw std::runtime_error("manifest values must be single-line");
  for (auto& [k, v] : entries)
    if (k == key) {
      v = value;
      return;
    }
  entries.emplace_back(key, value);
}

void RunManifest::set(const std::string& key, std::uint64_t value) {
  set(key, std::to_string(value));
}

void RunManifest::set(const std::string& key, double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  set(key, std::string(buf));
}

bool RunManifest::has(const std::string& key) const {
  for (const auto& [k, _] : entries)
    if (k == key) return true;
  return false;
}

const std::string& RunManifest::get(const std::string& key) const {
  for (const auto& [k, v] : entries)
    if (k == key) return v;
  throw std::runtime_error("manifest key missing: " + key);
}

std::string RunManifest::to_string() const {
  std::string out;
  for (const auto& [k, v] : entries) {
    out += k;
    out += " = ";
    out += v;
    out += "\n";
  }
  return out;
}

void RunManifest::write(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest: " + path);
  out << to_string();
}

RunManifest RunManifest::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest: " + path);
  RunManifest manifest;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto sep = line.find(" = ");
    if (sep == std::string::npos)
      throw std::runtime_error("manifest line " + std::to_string(line_no) +
                               " is not 'key = value'");
    manifest.entries.emplace_back(line.substr(0, sep), line.substr(sep + 3));
  }
  return manifest;
}

bool RunManifest::same_run(const RunManifest& other) const {
  auto covered_by = [](const RunManifest& a, const RunManifest& b) {
    for (const auto& [k, v] : a.entries)
      if (!b.has(k) || b.get(k) != v) return false;
    return true;
  };
  return covered_by(*this, other) && covered_by(other, *this);
}

void RunManifest::verify_corpus(const std::string& corpus_path) const {
  const std::string recorded = get("corpus_hash");
  const std::string actual = std::to_string(file_hash(corpus_path));
  if (recorded != actual)
    throw std::runtime_error(
        "corpus file " + corpus_path + " does not match the manifest (hash " +
        actual + " vs recorded " + recorded + "); refusing to claim reproduction");
}

}  // namespace longdoc
