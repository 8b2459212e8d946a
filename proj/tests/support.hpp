#ifndef KINDFORGE_TESTS_SUPPORT_HPP
#define KINDFORGE_TESTS_SUPPORT_HPP

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "kindforge/solution.hpp"
#include "kindforge/syntax.hpp"

namespace kindforge::testing {

inline std::filesystem::path corpus_dir() { return KINDFORGE_CORPUS_DIR; }
inline std::filesystem::path negative_dir() { return KINDFORGE_NEGATIVE_DIR; }
inline std::filesystem::path data_dir() { return KINDFORGE_TEST_DATA_DIR; }

inline std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

inline std::vector<std::filesystem::path> corpus_files() {
  std::vector<std::filesystem::path> out;
  for (const auto& entry : std::filesystem::directory_iterator(corpus_dir()))
    if (entry.path().extension() == ".fstk") out.push_back(entry.path());
  std::sort(out.begin(), out.end());
  return out;
}

// Renames kind and multiplicity variables in order of first occurrence, then
// compares the printed constraints as sets. Two sets are equal up to renaming
// when some bijection of variables maps one onto the other; trying every
// permutation of the first-occurrence order is enough for small sets.
inline Kind rename_kind(Kind k, const std::vector<std::uint32_t>& kv, const std::vector<std::uint32_t>& mv) {
  auto index = [](const std::vector<std::uint32_t>& order, std::uint32_t id) {
    return static_cast<std::uint32_t>(std::find(order.begin(), order.end(), id) - order.begin());
  };
  if (k.is_var()) return Kind::var(index(kv, k.var_id()));
  if (k.mult().is_var()) return Kind::concrete(Multiplicity::var(index(mv, k.mult().var_id())), k.prekind());
  return k;
}

inline std::vector<std::string> renamed(const std::vector<Constraint>& cs, const std::vector<std::uint32_t>& kv,
                                        const std::vector<std::uint32_t>& mv) {
  std::vector<std::string> out;
  for (const Constraint& c : cs) {
    if (c.is_sub()) {
      out.push_back(pretty(Constraint::sub(rename_kind(c.as_sub().lhs, kv, mv), rename_kind(c.as_sub().rhs, kv, mv))));
    } else {
      std::vector<Kind> args;
      for (Kind k : c.as_mult_eq().args) args.push_back(rename_kind(k, kv, mv));
      auto var = static_cast<std::uint32_t>(std::find(mv.begin(), mv.end(), c.as_mult_eq().var) - mv.begin());
      out.push_back(pretty(Constraint::mult_eq(Multiplicity::var(var), args)));
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

inline void collect_vars(const std::vector<Constraint>& cs, std::vector<std::uint32_t>& kv,
                         std::vector<std::uint32_t>& mv) {
  auto note = [](std::vector<std::uint32_t>& v, std::uint32_t id) {
    if (std::find(v.begin(), v.end(), id) == v.end()) v.push_back(id);
  };
  auto kind = [&](Kind k) {
    if (k.is_var()) note(kv, k.var_id());
    else if (k.mult().is_var()) note(mv, k.mult().var_id());
  };
  for (const Constraint& c : cs) {
    if (c.is_sub()) {
      kind(c.as_sub().lhs);
      kind(c.as_sub().rhs);
    } else {
      note(mv, c.as_mult_eq().var);
      for (Kind k : c.as_mult_eq().args) kind(k);
    }
  }
}

inline bool equal_up_to_renaming(const std::vector<Constraint>& a, const std::vector<Constraint>& b) {
  std::vector<std::uint32_t> akv, amv, bkv, bmv;
  collect_vars(a, akv, amv);
  collect_vars(b, bkv, bmv);
  if (akv.size() != bkv.size() || amv.size() != bmv.size()) return false;
  std::vector<std::string> target = renamed(b, bkv, bmv);
  std::sort(akv.begin(), akv.end());
  do {
    std::vector<std::uint32_t> mv = amv;
    std::sort(mv.begin(), mv.end());
    do {
      if (renamed(a, akv, mv) == target) return true;
    } while (std::next_permutation(mv.begin(), mv.end()));
  } while (std::next_permutation(akv.begin(), akv.end()));
  return false;
}

// Random constraint sets over at most `max_kvars` kind variables and
// `max_mvars` multiplicity variables. With `planted`, every constraint is
// checked against a random assignment and kept only if that assignment
// satisfies it, so the set is satisfiable.
class ConstraintGen {
 public:
  explicit ConstraintGen(std::uint32_t seed) : rng_(seed) {}

  std::vector<Constraint> next(bool planted, std::uint32_t max_kvars = 6, std::uint32_t max_mvars = 6) {
    nk_ = pick(1, max_kvars);
    nm_ = pick(0, max_mvars);
    Solution witness;
    for (std::uint32_t i = 0; i < nk_; ++i) witness.kind_vars[i] = kGroundKinds[pick(0, 3)];
    for (std::uint32_t i = 0; i < nm_; ++i) witness.mult_vars[i] = pick(0, 1) ? Multiplicity::lin() : Multiplicity::un();

    std::vector<Constraint> out;
    std::uint32_t target = pick(1, 3 * (nk_ + nm_) + 2);
    for (std::uint32_t tries = 0; out.size() < target && tries < 50 * target; ++tries) {
      Constraint c = constraint();
      if (planted && !holds(c, witness)) continue;
      out.push_back(c);
    }
    return out;
  }

 private:
  std::uint32_t pick(std::uint32_t lo, std::uint32_t hi) { return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng_); }

  Kind kind() {
    switch (pick(0, nm_ ? 3 : 2)) {
      case 0:
        return kGroundKinds[pick(0, 3)];
      case 3:
        return Kind::concrete(Multiplicity::var(pick(0, nm_ - 1)), pick(0, 1) ? Prekind::T : Prekind::S);
      default:
        return Kind::var(pick(0, nk_ - 1));
    }
  }

  Constraint constraint() {
    if (nm_ && pick(0, 3) == 0) {
      std::vector<Kind> args;
      for (std::uint32_t i = pick(1, 3); i > 0; --i) args.push_back(kind());
      return Constraint::mult_eq(Multiplicity::var(pick(0, nm_ - 1)), args, {"Gen", {}});
    }
    return Constraint::sub(kind(), kind(), {"Gen", {}});
  }

  static Kind ground(Kind k, const Solution& s) {
    if (k.is_var()) return s.kind_vars.at(k.var_id());
    if (k.mult().is_var()) return Kind::concrete(s.mult_vars.at(k.mult().var_id()), k.prekind());
    return k;
  }

  static bool holds(const Constraint& c, const Solution& s) {
    if (c.is_sub()) {
      Kind a = ground(c.as_sub().lhs, s), b = ground(c.as_sub().rhs, s);
      bool mult = a.mult() == Multiplicity::un() || b.mult() == Multiplicity::lin();
      bool pre = a.prekind() == Prekind::S || b.prekind() == Prekind::T;
      return mult && pre;
    }
    bool lin = false;
    for (Kind k : c.as_mult_eq().args) lin = lin || ground(k, s).mult() == Multiplicity::lin();
    return s.mult_vars.at(c.as_mult_eq().var) == (lin ? Multiplicity::lin() : Multiplicity::un());
  }

  std::mt19937 rng_;
  std::uint32_t nk_ = 0;
  std::uint32_t nm_ = 0;
};

// Random well-formed syntax trees within the printable fragment: ground
// multiplicities on arrows and units, written or variable kinds on binders.
class SyntaxGen {
 public:
  explicit SyntaxGen(std::uint32_t seed) : rng_(seed) {}

  TypeRef type(int depth = 4) {
    if (depth <= 0) return leaf();
    switch (pick(0, 12)) {
      case 0: return make_type(types::Msg{pick(0, 1) ? Polarity::Out : Polarity::In, type(depth - 1)});
      case 1: return make_type(types::Choice{pick(0, 1) ? View::Internal : View::External, fields(depth)});
      case 2: return make_type(types::Semi{type(depth - 1), type(depth - 1)});
      case 3: return make_type(types::Arrow{mult(), type(depth - 1), type(depth - 1)});
      case 4: return make_type(types::Record{fields(depth)});
      case 5: return make_type(types::Variant{fields(depth)});
      case 6: return make_type(types::Forall{var(), kind(), type(depth - 1)});
      case 7: return make_type(types::Rec{var(), kind(), type(depth - 1)});
      case 8: return make_type(types::Record{{{"fst", type(depth - 1)}, {"snd", type(depth - 1)}}});
      default: return leaf();
    }
  }

  ExprRef expr(int depth = 4) {
    if (depth <= 0) return atom();
    switch (pick(0, 15)) {
      case 0: return make_expr(exprs::Abs{mult(), var(), type(2), expr(depth - 1)});
      case 1: return make_expr(exprs::TAbs{var(), kind(), make_expr(exprs::Abs{mult(), var(), type(1), expr(depth - 1)})});
      case 2: return make_expr(exprs::App{expr(depth - 1), expr(depth - 1)});
      case 3: return make_expr(exprs::TApp{expr(depth - 1), type(2)});
      case 4: {
        LabelMap<ExprRef> fs;
        for (std::uint32_t i = 0, n = pick(1, 3); i < n; ++i) fs.insert(label(i), expr(depth - 1));
        return make_expr(exprs::RecordLit{fs});
      }
      case 5: {
        LabelMap<std::string> bs;
        for (std::uint32_t i = 0, n = pick(1, 3); i < n; ++i) bs.insert(label(i), var());
        return make_expr(exprs::LetRecord{bs, expr(depth - 1), expr(depth - 1)});
      }
      case 6: return make_expr(exprs::LetUnit{expr(depth - 1), expr(depth - 1)});
      case 7:
        return make_expr(exprs::Inject{"l0", make_type(types::Variant{fields(2)}), expr(depth - 1)});
      case 8:
      case 9: {
        LabelMap<Branch> bs;
        for (std::uint32_t i = 0, n = pick(1, 3); i < n; ++i) bs.insert(label(i), Branch{var(), expr(depth - 1)});
        if (pick(0, 1)) return make_expr(exprs::Case{expr(depth - 1), bs});
        return make_expr(exprs::Match{expr(depth - 1), bs});
      }
      case 10: return make_expr(exprs::New{type(2)});
      case 11: return make_expr(exprs::Select{label(pick(0, 2)), expr(depth - 1)});
      case 12: return make_expr(exprs::RecordLit{{{"fst", expr(depth - 1)}, {"snd", expr(depth - 1)}}});
      default: return atom();
    }
  }

 private:
  std::uint32_t pick(std::uint32_t lo, std::uint32_t hi) { return std::uniform_int_distribution<std::uint32_t>(lo, hi)(rng_); }

  Multiplicity mult() { return pick(0, 1) ? Multiplicity::lin() : Multiplicity::un(); }
  Kind kind() { return pick(0, 4) ? kGroundKinds[pick(0, 3)] : Kind::var(pick(0, 9)); }
  std::string var() { return std::string(1, static_cast<char>('a' + pick(0, 4))); }
  static std::string label(std::uint32_t i) { return "l" + std::to_string(i); }

  LabelMap<TypeRef> fields(int depth) {
    LabelMap<TypeRef> out;
    for (std::uint32_t i = 0, n = pick(1, 3); i < n; ++i) out.insert(label(i), type(depth - 1));
    return out;
  }

  TypeRef leaf() {
    switch (pick(0, 6)) {
      case 0: return make_type(types::Skip{});
      case 1: return make_type(types::End{});
      case 2: return make_type(types::Base{pick(0, 1) ? "Int" : "Bool"});
      case 3: return make_type(types::Unit{mult()});
      default: return make_type(types::Var{var()});
    }
  }

  ExprRef atom() {
    switch (pick(0, 6)) {
      case 0: return make_expr(exprs::UnitLit{});
      case 1: return make_expr(exprs::IntLit{pick(0, 99)});
      case 2: return make_expr(exprs::BoolLit{pick(0, 1) == 1});
      case 3: return make_expr(exprs::Const{static_cast<Builtin>(pick(0, 3))});
      default: return make_expr(exprs::Var{var()});
    }
  }

  std::mt19937 rng_;
};

}  // namespace kindforge::testing

#endif  // KINDFORGE_TESTS_SUPPORT_HPP
