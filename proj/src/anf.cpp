#include "bcsorder/anf.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <sstream>

#include "bcsorder/errors.hpp"

namespace bcsorder {

namespace {

// Sorts and drops monomials that occur an even number of times.
std::vector<Monomial> reduce_mod2(std::vector<Monomial> terms) {
  std::sort(terms.begin(), terms.end());
  std::size_t out = 0;
  for (std::size_t i = 0; i < terms.size();) {
    std::size_t j = i + 1;
    while (j < terms.size() && terms[j] == terms[i]) ++j;
    if ((j - i) % 2 == 1) terms[out++] = terms[i];
    i = j;
  }
  terms.resize(out);
  return terms;
}

// Formatting order: higher degree first, lexicographic within a degree.
bool format_before(Monomial a, Monomial b) noexcept {
  if (a.degree() != b.degree()) return a.degree() > b.degree();
  return canonical_less(a, b);
}

}  // namespace

std::vector<VarId> Monomial::vars() const {
  std::vector<VarId> out;
  for (std::uint64_t b = bits; b != 0; b &= b - 1) {
    out.push_back({static_cast<unsigned>(std::countr_zero(b)) + 1});
  }
  return out;
}

bool canonical_less(Monomial a, Monomial b) noexcept {
  if (a.degree() != b.degree()) return a.degree() < b.degree();
  const std::uint64_t diff = a.bits ^ b.bits;
  if (diff == 0) return false;
  // For equal-size sets, the set holding the lowest differing element has
  // the smaller element at the first differing position.
  return (a.bits & (diff & (~diff + 1))) != 0;
}

Poly::Poly(std::vector<Monomial> terms) : terms_(reduce_mod2(std::move(terms))) {}

Monomial Poly::support() const noexcept {
  Monomial s;
  for (const Monomial m : terms_) s.bits |= m.bits;
  return s;
}

std::optional<VarId> Poly::lvar() const noexcept {
  const Monomial s = support();
  if (s.is_one()) return std::nullopt;
  return s.top();
}

std::vector<Monomial> Poly::canonical_terms() const {
  std::vector<Monomial> out = terms_;
  std::sort(out.begin(), out.end(), format_before);
  return out;
}

bool Poly::eval(Assignment a) const noexcept {
  bool acc = false;
  for (const Monomial m : terms_) acc ^= m.eval(a);
  return acc;
}

Poly operator+(const Poly& a, const Poly& b) {
  std::vector<Monomial> out;
  out.reserve(a.terms_.size() + b.terms_.size());
  auto i = a.terms_.begin();
  auto j = b.terms_.begin();
  while (i != a.terms_.end() && j != b.terms_.end()) {
    if (*i < *j) {
      out.push_back(*i++);
    } else if (*j < *i) {
      out.push_back(*j++);
    } else {
      ++i;
      ++j;
    }
  }
  out.insert(out.end(), i, a.terms_.end());
  out.insert(out.end(), j, b.terms_.end());
  return Poly(Poly::Sorted{}, std::move(out));
}

Poly& Poly::operator+=(const Poly& b) {
  *this = *this + b;
  return *this;
}

Poly operator*(const Poly& a, const Poly& b) {
  if (a.is_zero() || b.is_zero()) return {};
  if (a.is_one()) return b;
  if (b.is_one()) return a;
  std::vector<Monomial> out;
  out.reserve(a.terms_.size() * b.terms_.size());
  for (const Monomial x : a.terms_) {
    for (const Monomial y : b.terms_) out.push_back(x * y);
  }
  return Poly(std::move(out));
}

Poly poly_add(const Poly& a, const Poly& b) { return a + b; }
Poly poly_mul(const Poly& a, const Poly& b) { return a * b; }

bool poly_eval(const Poly& p, std::span<const std::uint8_t> assignment) {
  const Monomial s = p.support();
  if (!s.is_one() && s.top().index > assignment.size()) {
    throw InputError("assignment of length " + std::to_string(assignment.size()) +
                     " does not cover x" + std::to_string(s.top().index));
  }
  Assignment packed = 0;
  for (std::size_t i = 0; i < assignment.size() && i < kMaxVars; ++i) {
    if (assignment[i] != 0) packed |= std::uint64_t{1} << i;
  }
  return p.eval(packed);
}

Poly substitute(const Poly& p, VarId v, const Poly& q) {
  const std::uint64_t mask = Monomial::of(v).bits;
  std::vector<Monomial> with;
  std::vector<Monomial> without;
  for (const Monomial m : p.terms()) {
    if (m.bits & mask) {
      with.push_back({m.bits & ~mask});
    } else {
      without.push_back(m);
    }
  }
  if (with.empty()) return p;
  return Poly(std::move(with)) * q + Poly(std::move(without));
}

namespace {

LeadingSplit split_on(const Poly& p, VarId lead) {
  const std::uint64_t mask = Monomial::of(lead).bits;
  std::vector<Monomial> initial;
  std::vector<Monomial> tail;
  for (const Monomial m : p.terms()) {
    if (m.bits & mask) {
      initial.push_back({m.bits & ~mask});
    } else {
      tail.push_back(m);
    }
  }
  return {lead, Poly(std::move(initial)), Poly(std::move(tail))};
}

}  // namespace

LeadingSplit leading_split(const Poly& p) {
  const auto lead = p.lvar();
  if (!lead) throw DomainError("leading_split of a constant polynomial");
  return split_on(p, *lead);
}

LeadingSplit leading_split(const Poly& p, const Ordering& order) {
  if (p.is_constant()) throw DomainError("leading_split of a constant polynomial");
  VarId lead{0};
  unsigned best_rank = 0;
  for (const VarId v : p.support().vars()) {
    if (v.index > order.size()) throw InputError("ordering shorter than polynomial support");
    if (order.position(v.index) > best_rank) {
      best_rank = order.position(v.index);
      lead = v;
    }
  }
  return split_on(p, lead);
}

std::optional<unsigned> tdeg(const Poly& p) {
  if (p.is_zero()) return std::nullopt;
  unsigned d = 0;
  for (const Monomial m : p.terms()) d = std::max(d, m.degree());
  return d;
}

Monomial lm(const Poly& p, const Ordering& order) {
  if (p.is_zero()) throw DomainError("leading monomial of the zero polynomial");
  auto ranks = [&](Monomial m) {
    std::vector<unsigned> r;
    for (const VarId v : m.vars()) r.push_back(order.position(v.index));
    std::sort(r.rbegin(), r.rend());
    return r;
  };
  Monomial best = p.terms().front();
  auto best_ranks = ranks(best);
  for (const Monomial m : p.terms().subspan(1)) {
    if (m.degree() != best.degree()) {
      if (m.degree() > best.degree()) {
        best = m;
        best_ranks = ranks(m);
      }
      continue;
    }
    auto r = ranks(m);
    if (r > best_ranks) {
      best = m;
      best_ranks = std::move(r);
    }
  }
  return best;
}

bool canonical_poly_less(const Poly& a, const Poly& b) {
  const auto ta = a.canonical_terms();
  const auto tb = b.canonical_terms();
  return std::lexicographical_compare(ta.begin(), ta.end(), tb.begin(), tb.end(), format_before);
}

std::string format_monomial(Monomial m) {
  if (m.is_one()) return "1";
  std::string out;
  for (const VarId v : m.vars()) {
    if (!out.empty()) out += '*';
    out += 'x';
    out += std::to_string(v.index);
  }
  return out;
}

std::string format_poly(const Poly& p) {
  if (p.is_zero()) return "0";
  std::string out;
  for (const Monomial m : p.canonical_terms()) {
    if (!out.empty()) out += " + ";
    out += format_monomial(m);
  }
  return out;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= s.size(); ++i) {
    if (i == s.size() || s[i] == sep) {
      parts.push_back(trim(s.substr(start, i - start)));
      start = i + 1;
    }
  }
  return parts;
}

bool parse_uint(std::string_view s, unsigned& out) {
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

Poly parse_poly(std::string_view line, unsigned n, std::size_t lineno) {
  if (line == "0") return {};
  std::vector<Monomial> terms;
  for (const std::string_view term : split(line, '+')) {
    if (term.empty()) throw ParseError(lineno, "empty term");
    Monomial m;
    for (const std::string_view factor : split(term, '*')) {
      if (factor == "1") continue;
      unsigned idx = 0;
      if (factor.size() < 2 || factor[0] != 'x' || !parse_uint(factor.substr(1), idx) || idx == 0) {
        throw ParseError(lineno, "unknown token '" + std::string(factor) + "'");
      }
      if (idx > n) {
        throw ParseError(lineno, "variable x" + std::to_string(idx) + " exceeds declared n=" + std::to_string(n));
      }
      m = m * Monomial::of({idx});
    }
    terms.push_back(m);
  }
  return Poly(std::move(terms));
}

}  // namespace

BoolSystem parse_system(const std::string& text) {
  BoolSystem s;
  bool have_header = false;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    std::string_view line = trim(raw);
    if (!have_header) {
      if (line.empty()) continue;
      constexpr std::string_view prefix = "# vars:";
      if (!line.starts_with(prefix) || !parse_uint(trim(line.substr(prefix.size())), s.n)) {
        throw ParseError(lineno, "expected '# vars: <n>' header");
      }
      if (s.n > kMaxVars) throw ParseError(lineno, "at most 64 variables are supported");
      have_header = true;
      continue;
    }
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      if (hash == 0) continue;
      line = trim(line.substr(0, hash));
    }
    if (line.empty()) continue;
    s.polys.push_back(parse_poly(line, s.n, lineno));
  }
  if (!have_header) throw ParseError(lineno == 0 ? 1 : lineno, "missing '# vars: <n>' header");
  return s;
}

std::string format_system(const BoolSystem& s) {
  std::string out = "# vars: " + std::to_string(s.n) + "\n";
  for (const Poly& p : s.polys) {
    out += format_poly(p);
    out += '\n';
  }
  return out;
}

BoolSystem load_system(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open system file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return parse_system(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(e.line(), path + ": " + e.detail());
  }
}

void save_system(const BoolSystem& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write system file " + path);
  out << format_system(s);
}

}  // namespace bcsorder
