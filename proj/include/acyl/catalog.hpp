#pragma once

// Fano threefold deformation families, gluing-candidate enumeration and the
// special-Lagrangian example records.

#include <acyl/catalog_data.hpp>
#include <acyl/curves.hpp>
#include <acyl/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace acyl::catalog {

inline constexpr std::size_t kFamilyCount = 105;
/// Families per Picard rank 1..10.
inline constexpr std::array<int, 10> kFamiliesPerRank{17, 36, 31, 13, 3, 1, 1, 1, 1, 1};
/// (rank, number) of the families whose anticanonical bundle is not very ample.
inline const std::set<std::pair<int, int>> kNotVeryAmple{{1, 1}, {1, 2}, {1, 12}, {2, 1},
                                                         {2, 2}, {2, 3}, {7, 1}, {8, 1}};
/// Index-1, rank-1 families carrying unobstructed lines.
inline const std::set<std::pair<int, int>> kLineCandidates{{1, 3}, {1, 4}, {1, 5}, {1, 6},
                                                           {1, 7}, {1, 8}, {1, 9}, {1, 10}};
inline constexpr int kMaxRankSum = 11;

struct FanoRecord {
  int picard_rank = 0;
  int number_in_rank = 0;
  int fano_index = 0;
  bool very_ample = false;
  bool line_candidate = false;

  std::pair<int, int> key() const { return {picard_rank, number_in_rank}; }
  std::string label() const { return std::to_string(picard_rank) + "-" + std::to_string(number_in_rank); }
};

struct Catalog {
  std::vector<FanoRecord> records;
  std::vector<std::string> warnings;  // flag disagreements with the known lists

  const FanoRecord* find(int rank, int number) const {
    for (const auto& r : records)
      if (r.picard_rank == rank && r.number_in_rank == number) return &r;
    return nullptr;
  }
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  return s;
}

inline int parse_uint(std::string_view field, int line, const char* what) {
  if (field.empty() || !std::all_of(field.begin(), field.end(), [](char c) { return c >= '0' && c <= '9'; }))
    throw DatasetValidation(line, std::string("malformed ") + what + " '" + std::string(field) + "'");
  int v = 0;
  auto [p, ec] = std::from_chars(field.data(), field.data() + field.size(), v);
  if (ec != std::errc{} || p != field.data() + field.size())
    throw DatasetValidation(line, std::string("malformed ") + what);
  return v;
}

inline bool parse_bool(std::string_view field, int line, const char* what) {
  if (field == "true") return true;
  if (field == "false") return false;
  throw DatasetValidation(line, std::string(what) + " must be lowercase true/false, got '" + std::string(field) + "'");
}

}  // namespace detail

/// Advisory checks of the flags against the known exception lists. Structural
/// problems are errors at load time; these are reported as warnings.
inline std::vector<std::string> validate_flags(const std::vector<FanoRecord>& records) {
  std::vector<std::string> w;
  for (const auto& r : records) {
    const bool expect_va = !kNotVeryAmple.count(r.key());
    if (r.very_ample != expect_va)
      w.push_back("family " + r.label() + ": very_ample=" + (r.very_ample ? "true" : "false") +
                  " disagrees with the not-very-ample list");
    const bool expect_line = kLineCandidates.count(r.key()) > 0;
    if (r.line_candidate != expect_line)
      w.push_back("family " + r.label() + ": line_candidate flag disagrees with the index-1 rank-1 list");
    if (r.line_candidate && (r.picard_rank != 1 || r.fano_index != 1 || !r.very_ample))
      w.push_back("family " + r.label() + ": line candidate must be very ample of rank 1 and index 1");
  }
  return w;
}

/// Strict parser: one record per line, `rank,number,index,very_ample,line_candidate`,
/// optional trailing `# comment`, whole-line comments and blank lines allowed.
inline Catalog parse_catalog(std::string_view text) {
  Catalog cat;
  std::set<std::pair<int, int>> seen;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    const std::size_t nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() : nl + 1;
    ++line_no;
    if (line.find('\r') != std::string_view::npos) throw DatasetValidation(line_no, "CR found; LF line endings required");
    if (const auto h = line.find('#'); h != std::string_view::npos) line = line.substr(0, h);
    for (char c : line)
      if (static_cast<unsigned char>(c) >= 0x80) throw DatasetValidation(line_no, "non-ASCII byte in record");
    line = detail::trim(line);
    if (line.empty()) continue;

    std::array<std::string_view, 5> f{};
    std::size_t start = 0, n = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      if (n == f.size()) throw DatasetValidation(line_no, "too many fields");
      f[n++] = detail::trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (n != f.size()) throw DatasetValidation(line_no, "expected 5 comma-separated fields");

    FanoRecord r;
    r.picard_rank = detail::parse_uint(f[0], line_no, "rank");
    r.number_in_rank = detail::parse_uint(f[1], line_no, "number");
    r.fano_index = detail::parse_uint(f[2], line_no, "index");
    r.very_ample = detail::parse_bool(f[3], line_no, "very_ample");
    r.line_candidate = detail::parse_bool(f[4], line_no, "line_candidate");
    if (r.picard_rank < 1 || r.picard_rank > 10) throw DatasetValidation(line_no, "rank must lie in [1,10]");
    if (r.number_in_rank < 1 || r.number_in_rank > kFamiliesPerRank[static_cast<std::size_t>(r.picard_rank - 1)])
      throw DatasetValidation(line_no, "number out of range for rank " + std::to_string(r.picard_rank));
    if (r.fano_index < 1 || r.fano_index > 4) throw DatasetValidation(line_no, "Fano index must lie in [1,4]");
    if (!seen.insert(r.key()).second) throw DatasetValidation(line_no, "duplicate family " + r.label());
    cat.records.push_back(r);
  }
  if (cat.records.size() != kFamilyCount)
    throw DatasetValidation(0, "expected " + std::to_string(kFamilyCount) + " records, found " +
                                   std::to_string(cat.records.size()));
  cat.warnings = validate_flags(cat.records);
  return cat;
}

inline std::string_view embedded_catalog_text() {
  std::string_view s = detail::kEmbeddedCatalog;
  if (!s.empty() && s.front() == '\n') s.remove_prefix(1);
  return s;
}

/// Loads from a file path, or the embedded default when `path` is empty.
inline Catalog load_catalog(const std::string& path = {}) {
  if (path.empty()) return parse_catalog(embedded_catalog_text());
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetValidation(0, "cannot open dataset " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_catalog(ss.str());
}

inline std::vector<FanoRecord> very_ample_families(const Catalog& c) {
  std::vector<FanoRecord> out;
  std::copy_if(c.records.begin(), c.records.end(), std::back_inserter(out),
               [](const FanoRecord& r) { return r.very_ample; });
  return out;
}

inline std::vector<FanoRecord> line_candidates(const Catalog& c) {
  std::vector<FanoRecord> out;
  std::copy_if(c.records.begin(), c.records.end(), std::back_inserter(out),
               [](const FanoRecord& r) { return r.line_candidate && r.very_ample; });
  return out;
}

/// Ordered pairs (W+, W-): W+ carries an unobstructed line, W- is very
/// ample, and the Picard ranks sum to at most 11. Self-pairs are allowed.
inline std::vector<std::pair<FanoRecord, FanoRecord>> enumerate_sphere_pairs(const Catalog& c) {
  std::vector<std::pair<FanoRecord, FanoRecord>> out;
  for (const auto& p : c.records) {
    if (!p.line_candidate) continue;
    for (const auto& q : c.records)
      if (q.very_ample && p.picard_rank + q.picard_rank <= kMaxRankSum) out.emplace_back(p, q);
  }
  return out;
}

// ---------------------------------------------------------------- examples

enum class Construction { QuarticP4Involution, KLBlockQuarticK3, KLBlockWeightedP1113 };

inline const char* to_string(Construction c) {
  switch (c) {
    case Construction::QuarticP4Involution: return "quartic-P4-involution";
    case Construction::KLBlockQuarticK3: return "KL-block-quartic-K3";
    case Construction::KLBlockWeightedP1113: return "KL-block-weighted-P1113";
  }
  return "?";
}

/// A closed associative obtained by gluing two ACyl special Lagrangians.
struct ExampleRecord {
  std::string name;
  Construction construction;
  curves::SLBettiData plus;   // ACyl special Lagrangian in the first block
  curves::SLBettiData minus;  // its partner in the second block
  std::string expected_topology;
  std::string notes;

  curves::HypothesisReport check() const {
    return curves::check_sl_gluing_hypothesis(plus, minus, true, std::nullopt);
  }
};

inline std::vector<ExampleRecord> example_records() {
  // 3-ball: b = (1,0,0), boundary S^2. RP^3 minus a ball: same real Betti numbers.
  const curves::SLBettiData ball{1, 0, 0, 1, 0};
  const curves::SLBettiData punctured_rp3{1, 0, 0, 1, 0};
  return {
      {"nordstrom-rp3", Construction::QuarticP4Involution, ball, punctured_rp3, "RP3",
       "L+ is one of the two 3-balls in the real locus of a quartic 3-fold minus its S^2 boundary; "
       "sigma+ is complex conjugation, rho_infty acts antipodally on Sigma+ = S^2"},
      {"rp3rp3-quartic-k3", Construction::KLBlockQuarticK3, punctured_rp3, punctured_rp3, "RP3#RP3",
       "L+ is the proper transform of (RP^1 x Sigma_infty)/Z2 in a Kovalev-Lee block over the quartic K3"},
      {"rp3rp3-weighted-p1113", Construction::KLBlockWeightedP1113, punctured_rp3, punctured_rp3, "RP3#RP3",
       "K3 double cover of P^2 branched along z0^6+z1^6+z2^6 = 0 inside P(1,1,1,3)"},
  };
}

inline nlohmann::json to_json(const FanoRecord& r) {
  return {{"rank", r.picard_rank},
          {"number", r.number_in_rank},
          {"index", r.fano_index},
          {"very_ample", r.very_ample},
          {"line_candidate", r.line_candidate}};
}

inline FanoRecord fano_from_json(const nlohmann::json& j) {
  return {j.at("rank").get<int>(), j.at("number").get<int>(), j.at("index").get<int>(),
          j.at("very_ample").get<bool>(), j.at("line_candidate").get<bool>()};
}

inline std::string to_csv_row(const FanoRecord& r) {
  return std::to_string(r.picard_rank) + "," + std::to_string(r.number_in_rank) + "," +
         std::to_string(r.fano_index) + "," + (r.very_ample ? "true" : "false") + "," +
         (r.line_candidate ? "true" : "false");
}

inline nlohmann::json to_json(const ExampleRecord& e) {
  return {{"name", e.name},
          {"construction", to_string(e.construction)},
          {"plus", curves::to_json(e.plus)},
          {"minus", curves::to_json(e.minus)},
          {"expected_topology", e.expected_topology},
          {"notes", e.notes}};
}

}  // namespace acyl::catalog
