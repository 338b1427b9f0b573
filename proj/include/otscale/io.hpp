#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "otscale/core.hpp"
#include "otscale/mcc_types.hpp"
#include "otscale/sinkhorn.hpp"

namespace otscale {

// Canonical number formatting for all text artifacts: integers print bare
// (no exponent, no trailing zeros), everything else with 17 significant
// digits so parse -> serialize is the identity on binary64.
inline std::string format_number(double v) {
  if (v == 0.0) return "0";
  char buf[64];
  if (std::nearbyint(v) == v && std::fabs(v) < 9.007199254740992e15) {
    std::snprintf(buf, sizeof buf, "%.0f", v);
  } else {
    std::snprintf(buf, sizeof buf, "%.17g", v);
  }
  return buf;
}

namespace io_detail {

inline std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  return lines;
}

inline std::vector<std::string> tokens_of(const std::string& line) {
  std::istringstream in(line);
  std::vector<std::string> toks;
  std::string t;
  while (in >> t) toks.push_back(t);
  return toks;
}

[[noreturn]] inline void bad_line(int line_no, const std::string& why) {
  fail(ErrKind::parse_error, "line " + std::to_string(line_no + 1) + ": " + why);
}

inline double parse_real(const std::string& tok, int line_no) {
  size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    bad_line(line_no, "expected a number, got '" + tok + "'");
  }
  if (used != tok.size()) bad_line(line_no, "trailing junk in number '" + tok + "'");
  return v;
}

inline long long parse_int(const std::string& tok, int line_no) {
  size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(tok, &used);
  } catch (const std::exception&) {
    bad_line(line_no, "expected an integer, got '" + tok + "'");
  }
  if (used != tok.size()) bad_line(line_no, "trailing junk in integer '" + tok + "'");
  return v;
}

// Keyword line "key v1 v2 ..." with an exact token count.
inline std::vector<std::string> keyword_line(const std::vector<std::string>& lines, int line_no,
                                             const std::string& key, int values) {
  if (static_cast<size_t>(line_no) >= lines.size())
    bad_line(line_no, "missing '" + key + "' line");
  std::vector<std::string> toks = tokens_of(lines[line_no]);
  if (toks.empty() || toks[0] != key) bad_line(line_no, "expected '" + key + "' line");
  if (static_cast<int>(toks.size()) != values + 1)
    bad_line(line_no, "'" + key + "' needs exactly " + std::to_string(values) + " value(s)");
  return toks;
}

}  // namespace io_detail

// Instance file: canonical field order n, m, r, c, Q with the cost matrix
// row-major, one row per line. Marginals are integers; costs may be reals.
//
//   n 2
//   m 2
//   r 2 1
//   c 1 2
//   Q
//   1 2
//   3 1

// Marginals as parsed, before the integrality requirement is applied; the
// rationalization path in the CLI starts from this.
struct RawInstance {
  int n = 0;
  int m = 0;
  std::vector<double> row_marginal;
  std::vector<double> col_marginal;
  Matrix cost;
};

inline RawInstance parse_raw_instance(const std::string& text) {
  using namespace io_detail;
  std::vector<std::string> lines = split_lines(text);
  RawInstance raw;

  std::vector<std::string> t = keyword_line(lines, 0, "n", 1);
  long long n = parse_int(t[1], 0);
  t = keyword_line(lines, 1, "m", 1);
  long long m = parse_int(t[1], 1);
  if (n <= 0 || m <= 0 || n > 100000 || m > 100000)
    fail(ErrKind::parse_error, "instance dimensions out of range");
  raw.n = static_cast<int>(n);
  raw.m = static_cast<int>(m);

  t = keyword_line(lines, 2, "r", raw.n);
  for (int i = 0; i < raw.n; ++i) raw.row_marginal.push_back(parse_real(t[1 + i], 2));
  t = keyword_line(lines, 3, "c", raw.m);
  for (int j = 0; j < raw.m; ++j) raw.col_marginal.push_back(parse_real(t[1 + j], 3));

  keyword_line(lines, 4, "Q", 0);
  raw.cost = Matrix(raw.n, raw.m, 0.0);
  for (int i = 0; i < raw.n; ++i) {
    int line_no = 5 + i;
    if (static_cast<size_t>(line_no) >= lines.size()) bad_line(line_no, "missing cost row");
    std::vector<std::string> row = tokens_of(lines[line_no]);
    if (static_cast<int>(row.size()) != raw.m)
      bad_line(line_no, "cost row needs exactly " + std::to_string(raw.m) + " entries");
    for (int j = 0; j < raw.m; ++j) raw.cost(i, j) = parse_real(row[j], line_no);
  }
  for (size_t k = 5 + raw.n; k < lines.size(); ++k)
    if (!io_detail::tokens_of(lines[k]).empty())
      bad_line(static_cast<int>(k), "unexpected content after cost matrix");
  return raw;
}

inline TransportInstance instance_from_raw(const RawInstance& raw) {
  std::vector<long long> r(raw.n), c(raw.m);
  for (int i = 0; i < raw.n; ++i) {
    if (raw.row_marginal[i] != std::nearbyint(raw.row_marginal[i]))
      fail(ErrKind::parse_error, "row marginal " + std::to_string(i) + " is not an integer");
    r[i] = std::llround(raw.row_marginal[i]);
  }
  for (int j = 0; j < raw.m; ++j) {
    if (raw.col_marginal[j] != std::nearbyint(raw.col_marginal[j]))
      fail(ErrKind::parse_error, "column marginal " + std::to_string(j) + " is not an integer");
    c[j] = std::llround(raw.col_marginal[j]);
  }
  return validate_instance(raw.cost, std::move(r), std::move(c));
}

inline TransportInstance parse_instance(const std::string& text) {
  return instance_from_raw(parse_raw_instance(text));
}

inline std::string write_instance(const TransportInstance& inst) {
  std::string out;
  out += "n " + std::to_string(inst.n) + "\n";
  out += "m " + std::to_string(inst.m) + "\n";
  out += "r";
  for (long long v : inst.row_marginal) out += " " + std::to_string(v);
  out += "\nc";
  for (long long v : inst.col_marginal) out += " " + std::to_string(v);
  out += "\nQ\n";
  for (int i = 0; i < inst.n; ++i) {
    for (int j = 0; j < inst.m; ++j) {
      if (j) out += " ";
      out += format_number(inst.cost(i, j));
    }
    out += "\n";
  }
  return out;
}

// Plan file: the matrix alone, same layout and formatting as the cost block.
//
//   n 2
//   m 2
//   X
//   1 1
//   0 1

inline std::string write_plan_matrix(const Matrix& x) {
  std::string out;
  out += "n " + std::to_string(x.rows) + "\n";
  out += "m " + std::to_string(x.cols) + "\n";
  out += "X\n";
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < x.cols; ++j) {
      if (j) out += " ";
      out += format_number(x(i, j));
    }
    out += "\n";
  }
  return out;
}

inline Matrix parse_plan_matrix(const std::string& text) {
  using namespace io_detail;
  std::vector<std::string> lines = split_lines(text);
  std::vector<std::string> t = keyword_line(lines, 0, "n", 1);
  long long n = parse_int(t[1], 0);
  t = keyword_line(lines, 1, "m", 1);
  long long m = parse_int(t[1], 1);
  if (n <= 0 || m <= 0 || n > 100000 || m > 100000)
    fail(ErrKind::parse_error, "plan dimensions out of range");
  keyword_line(lines, 2, "X", 0);
  Matrix x(static_cast<int>(n), static_cast<int>(m), 0.0);
  for (int i = 0; i < x.rows; ++i) {
    int line_no = 3 + i;
    if (static_cast<size_t>(line_no) >= lines.size()) bad_line(line_no, "missing plan row");
    std::vector<std::string> row = tokens_of(lines[line_no]);
    if (static_cast<int>(row.size()) != x.cols)
      bad_line(line_no, "plan row needs exactly " + std::to_string(x.cols) + " entries");
    for (int j = 0; j < x.cols; ++j) x(i, j) = parse_real(row[j], line_no);
  }
  return x;
}

// Trace file: fixed header, one row per engine step. Write-only; meant for
// external tooling.
inline std::string write_trace(const IterationTrace& trace) {
  std::string out = "step eta op l1_row l1_col dual gap_bound\n";
  for (const TraceRecord& r : trace.records) {
    out += std::to_string(r.step);
    out += " " + format_number(r.eta);
    out += " ";
    out += step_kind_name(r.op);
    out += " " + format_number(r.l1_row);
    out += " " + format_number(r.l1_col);
    out += " " + format_number(r.dual);
    out += " " + format_number(r.gap_bound);
    out += "\n";
  }
  return out;
}

// Circulation files, DIMACS-like: "p mcc <V> <E>" then one "a" line per
// edge, vertices 1-indexed. Comment lines starting with 'c' are accepted on
// parse and never emitted, so canonical files round-trip bit-exactly.

inline std::string write_mcc(const MccInstance& mcc) {
  std::string out = "p mcc " + std::to_string(mcc.num_vertices) + " " +
                    std::to_string(mcc.edges.size()) + "\n";
  for (const MccInstance::Edge& e : mcc.edges)
    out += "a " + std::to_string(e.tail + 1) + " " + std::to_string(e.head + 1) + " " +
           std::to_string(e.capacity) + " " + std::to_string(e.cost) + "\n";
  return out;
}

inline MccInstance parse_mcc(const std::string& text) {
  using namespace io_detail;
  std::vector<std::string> lines = split_lines(text);
  MccInstance mcc;
  bool have_header = false;
  long long expect_edges = 0;
  for (size_t k = 0; k < lines.size(); ++k) {
    std::vector<std::string> toks = tokens_of(lines[k]);
    if (toks.empty() || toks[0] == "c") continue;
    int line_no = static_cast<int>(k);
    if (!have_header) {
      if (toks[0] != "p" || toks.size() != 4 || toks[1] != "mcc")
        bad_line(line_no, "expected header 'p mcc <vertices> <edges>'");
      long long v = parse_int(toks[2], line_no);
      expect_edges = parse_int(toks[3], line_no);
      if (v <= 0 || v > 1000000 || expect_edges < 0)
        fail(ErrKind::parse_error, "header counts out of range");
      mcc.num_vertices = static_cast<int>(v);
      have_header = true;
      continue;
    }
    if (toks[0] != "a" || toks.size() != 5)
      bad_line(line_no, "expected edge line 'a <tail> <head> <capacity> <cost>'");
    MccInstance::Edge e;
    long long tail = parse_int(toks[1], line_no);
    long long head = parse_int(toks[2], line_no);
    if (tail < 1 || tail > mcc.num_vertices || head < 1 || head > mcc.num_vertices)
      fail(ErrKind::vertex_out_of_range,
           "line " + std::to_string(line_no + 1) + ": endpoint out of range");
    e.tail = static_cast<int>(tail - 1);
    e.head = static_cast<int>(head - 1);
    e.capacity = parse_int(toks[3], line_no);
    e.cost = parse_int(toks[4], line_no);
    mcc.edges.push_back(e);
  }
  if (!have_header) fail(ErrKind::parse_error, "missing 'p mcc' header");
  if (static_cast<long long>(mcc.edges.size()) != expect_edges)
    fail(ErrKind::parse_error, "header announced " + std::to_string(expect_edges) +
                                   " edges, file has " + std::to_string(mcc.edges.size()));
  return validate_mcc(mcc);
}

// Circulation result file: "s <cost>" then per-edge flows in instance order.
inline std::string write_circulation(const Circulation& f, const MccInstance& mcc,
                                     long long cost) {
  std::string out = "s " + std::to_string(cost) + "\n";
  for (size_t e = 0; e < mcc.edges.size(); ++e)
    out += "f " + std::to_string(mcc.edges[e].tail + 1) + " " +
           std::to_string(mcc.edges[e].head + 1) + " " + std::to_string(f.flow[e]) + "\n";
  return out;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrKind::parse_error, "cannot read '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrKind::bad_argument, "cannot write '" + path + "'");
  out << content;
  if (!out.flush()) fail(ErrKind::bad_argument, "failed writing '" + path + "'");
}

}  // namespace otscale
