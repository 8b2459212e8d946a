#include "kindforge/solver.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <map>
#include <set>

#include "kindforge/lattice.hpp"

namespace kindforge {

std::string to_string(const TraceEntry& e) {
  return fmt::format("iter {}: {} {} -> {} (by {} @ {}@{})", e.iteration, e.var, e.before, e.after, e.constraint,
                     e.origin.rule, to_string(e.origin.span));
}

SolveError::SolveError(Constraint constraint, std::string lhs_resolved, std::string rhs_resolved)
    : Error(ErrorCode::Unsatisfiable, constraint.origin().span,
            fmt::format("constraint {} (from {}) is unsatisfiable: {} is not below {}", pretty(constraint),
                        constraint.origin().rule, lhs_resolved, rhs_resolved)),
      constraint_(std::move(constraint)),
      lhs_(std::move(lhs_resolved)),
      rhs_(std::move(rhs_resolved)) {}

namespace {

void collect(Kind k, std::set<std::uint32_t>& kvs, std::set<std::uint32_t>& mvs) {
  if (k.is_var())
    kvs.insert(k.var_id());
  else if (k.mult().is_var())
    mvs.insert(k.mult().var_id());
}

}  // namespace

VariableSet variables_of(std::span<const Constraint> constraints) {
  std::set<std::uint32_t> kvs, mvs;
  for (const auto& c : constraints) {
    if (c.is_sub()) {
      collect(c.as_sub().lhs, kvs, mvs);
      collect(c.as_sub().rhs, kvs, mvs);
    } else {
      mvs.insert(c.as_mult_eq().var);
      for (Kind k : c.as_mult_eq().args) collect(k, kvs, mvs);
    }
  }
  return {{kvs.begin(), kvs.end()}, {mvs.begin(), mvs.end()}};
}

Kind resolve(Kind k, const Solution& solution) {
  if (k.is_var()) {
    auto it = solution.kind_vars.find(k.var_id());
    if (it == solution.kind_vars.end())
      throw Error(ErrorCode::UnresolvedVariable, {}, fmt::format("no assignment for {}", pretty(k)));
    return it->second;
  }
  if (k.mult().is_var()) return Kind::concrete(lattice::mult_of(k, &solution), k.prekind());
  return k;
}

bool satisfies(const Solution& s, std::span<const Constraint> constraints) {
  for (const auto& c : constraints) {
    if (c.is_sub()) {
      if (!lattice::subkind(resolve(c.as_sub().lhs, s), resolve(c.as_sub().rhs, s))) return false;
    } else {
      std::vector<Multiplicity> ms;
      for (Kind k : c.as_mult_eq().args) ms.push_back(lattice::mult_of(k, &s));
      auto it = s.mult_vars.find(c.as_mult_eq().var);
      if (it == s.mult_vars.end() || it->second != lattice::mult_lub(ms)) return false;
    }
  }
  return true;
}

namespace {

// Kinds with variables replaced by dense indices into the solver state.
struct Slot {
  enum class Tag : std::uint8_t { Ground, KindVar, MultVar } tag;
  Kind ground = Kind::su();
  std::uint32_t index = 0;
  Prekind pre = Prekind::S;
};

class FixpointSolver {
 public:
  FixpointSolver(std::span<const Constraint> constraints, const SolverConfig& config)
      : constraints_(constraints), config_(config) {
    VariableSet vars = variables_of(constraints);
    for (std::uint32_t id : vars.kind_vars) {
      kind_index_[id] = static_cast<std::uint32_t>(kind_ids_.size());
      kind_ids_.push_back(id);
    }
    for (std::uint32_t id : vars.mult_vars) {
      mult_index_[id] = static_cast<std::uint32_t>(mult_ids_.size());
      mult_ids_.push_back(id);
    }
    kinds_.assign(kind_ids_.size(), Kind::tl());
    mults_.assign(mult_ids_.size(), Multiplicity::lin());
    lowered_by_.assign(mult_ids_.size(), kNone);
    if (const Solution* start = config.start) {
      for (std::size_t i = 0; i < kind_ids_.size(); ++i)
        if (auto it = start->kind_vars.find(kind_ids_[i]); it != start->kind_vars.end()) kinds_[i] = it->second;
      for (std::size_t i = 0; i < mult_ids_.size(); ++i)
        if (auto it = start->mult_vars.find(mult_ids_[i]); it != start->mult_vars.end()) mults_[i] = it->second;
    }
    for (const auto& c : constraints) {
      if (c.is_sub()) {
        compiled_.push_back({slot(c.as_sub().lhs), slot(c.as_sub().rhs), {}, 0});
      } else {
        Compiled cc{{}, {}, {}, mult_index_.at(c.as_mult_eq().var)};
        for (Kind k : c.as_mult_eq().args) cc.args.push_back(slot(k));
        compiled_.push_back(std::move(cc));
      }
    }
    kind_readers_.resize(kind_ids_.size());
    mult_readers_.resize(mult_ids_.size());
    for (std::size_t i = 0; i < compiled_.size(); ++i) {
      const Compiled& cc = compiled_[i];
      auto note = [&](const Slot& s) {
        if (s.tag == Slot::Tag::KindVar) kind_readers_[s.index].push_back(i);
        if (s.tag == Slot::Tag::MultVar) mult_readers_[s.index].push_back(i);
      };
      if (constraints_[i].is_sub()) {
        note(cc.lhs);
        note(cc.rhs);
      } else {
        mult_readers_[cc.mult_var].push_back(i);
        for (const Slot& s : cc.args) note(s);
      }
    }
  }

  SolveResult run() {
    std::size_t nvars = kind_ids_.size() + mult_ids_.size();
    bound_ = config_.max_iterations.value_or(3 * nvars + 3);
    if (config_.optimize)
      run_worklist();
    else
      run_sweeps();
    for (std::size_t i = 0; i < kinds_.size(); ++i) result_.solution.kind_vars[kind_ids_[i]] = kinds_[i];
    for (std::size_t i = 0; i < mults_.size(); ++i) result_.solution.mult_vars[mult_ids_[i]] = mults_[i];
    return std::move(result_);
  }

 private:
  void next_iteration() {
    if (result_.iterations >= bound_)
      throw Error(ErrorCode::IterationBoundExceeded, {},
                  fmt::format("no fixpoint after {} iterations over {} variables", bound_,
                              kind_ids_.size() + mult_ids_.size()));
    ++result_.iterations;
  }

  // Visits every remaining constraint in each iteration until one makes no
  // update. Only constraints known to hold for good are removed.
  void run_sweeps() {
    std::vector<std::size_t> active(constraints_.size());
    for (std::size_t i = 0; i < active.size(); ++i) active[i] = i;
    std::vector<char> drop(constraints_.size(), 0);
    while (true) {
      next_iteration();
      std::size_t updates_before = result_.updates;
      for (std::size_t i : active) drop[i] = step(i) ? 1 : 0;
      std::erase_if(active, [&](std::size_t i) { return drop[i] != 0; });
      if (result_.updates == updates_before) break;
    }
  }

  // A constraint is revisited only when a variable it mentions went down
  // since its last visit; each variable goes down at most twice, so the total
  // work is linear. Each iteration visits its constraints in emission order.
  void run_worklist() {
    std::vector<std::size_t> current(constraints_.size());
    for (std::size_t i = 0; i < current.size(); ++i) current[i] = i;
    queued_.assign(constraints_.size(), 0);
    while (!current.empty()) {
      next_iteration();
      for (std::size_t i : current) queued_[i] = 0;
      for (std::size_t i : current) {
        visiting_ = i;
        step(i);
      }
      visiting_ = kNone;
      current.swap(next_);
      next_.clear();
      std::sort(current.begin(), current.end());
    }
  }

  void wake(const std::vector<std::size_t>& readers) {
    if (!config_.optimize) return;
    for (std::size_t c : readers) {
      if (c == visiting_ || queued_[c]) continue;
      queued_[c] = 1;
      next_.push_back(c);
    }
  }

  struct Compiled {
    Slot lhs;
    Slot rhs;
    std::vector<Slot> args;
    std::uint32_t mult_var;
  };

  Slot slot(Kind k) const {
    if (k.is_var()) return {Slot::Tag::KindVar, Kind::su(), kind_index_.at(k.var_id()), Prekind::S};
    if (k.mult().is_var()) return {Slot::Tag::MultVar, Kind::su(), mult_index_.at(k.mult().var_id()), k.prekind()};
    return {Slot::Tag::Ground, k, 0, Prekind::S};
  }

  Kind value(const Slot& s) const {
    switch (s.tag) {
      case Slot::Tag::Ground: return s.ground;
      case Slot::Tag::KindVar: return kinds_[s.index];
      case Slot::Tag::MultVar: return Kind::concrete(mults_[s.index], s.pre);
    }
    return s.ground;
  }

  void lower_kind(std::uint32_t index, Kind to, std::size_t c) {
    Kind before = kinds_[index];
    if (before == to) return;
    kinds_[index] = to;
    ++result_.updates;
    if (config_.trace) record(pretty(Kind::var(kind_ids_[index])), pretty(before), pretty(to), c);
    wake(kind_readers_[index]);
  }

  void lower_mult(std::uint32_t index, Multiplicity to, std::size_t c) {
    Multiplicity before = mults_[index];
    if (before == to) return;
    mults_[index] = to;
    ++result_.updates;
    if (config_.trace) record(pretty(Multiplicity::var(mult_ids_[index])), pretty(before), pretty(to), c);
    wake(mult_readers_[index]);
  }

  void record(std::string var, std::string before, std::string after, std::size_t c) {
    result_.trace.push_back({result_.iterations, std::move(var), std::move(before), std::move(after),
                             pretty(constraints_[c]), constraints_[c].origin()});
  }

  [[noreturn]] void fail(std::size_t c, const std::string& lhs, const std::string& rhs) const {
    throw SolveError(constraints_[c], lhs, rhs);
  }

  // Processes constraint `c`; returns true when it holds for good.
  bool step(std::size_t c) {
    const Compiled& cc = compiled_[c];
    if (!constraints_[c].is_sub()) return equation(c, cc);

    Kind rhs = value(cc.rhs);
    switch (cc.lhs.tag) {
      case Slot::Tag::KindVar: {
        lower_kind(cc.lhs.index, lattice::glb(kinds_[cc.lhs.index], rhs), c);
        return false;
      }
      case Slot::Tag::MultVar: {
        if (!lattice::prekind_le(cc.lhs.pre, rhs.prekind())) fail(c, pretty(value(cc.lhs)), pretty(rhs));
        Multiplicity before = mults_[cc.lhs.index];
        lower_mult(cc.lhs.index, lattice::mult_glb(before, rhs.mult()), c);
        if (before != mults_[cc.lhs.index]) lowered_by_[cc.lhs.index] = c;
        return false;
      }
      case Slot::Tag::Ground: {
        if (!lattice::subkind(cc.lhs.ground, rhs)) fail(c, pretty(cc.lhs.ground), pretty(rhs));
        return cc.rhs.tag == Slot::Tag::Ground || cc.lhs.ground == Kind::su();
      }
    }
    return false;
  }

  bool equation(std::size_t c, const Compiled& cc) {
    std::vector<Multiplicity> ms;
    ms.reserve(cc.args.size());
    for (const Slot& s : cc.args) ms.push_back(value(s).mult());
    Multiplicity computed = lattice::mult_lub(ms);
    if (computed == Multiplicity::un()) lower_mult(cc.mult_var, computed, c);
    if (mults_[cc.mult_var] == Multiplicity::lin()) return false;

    // The variable is unrestricted, so every argument must be too.
    for (const Slot& s : cc.args) {
      switch (s.tag) {
        case Slot::Tag::KindVar: lower_kind(s.index, lattice::glb(kinds_[s.index], Kind::tu()), c); break;
        case Slot::Tag::MultVar: lower_mult(s.index, Multiplicity::un(), c); break;
        case Slot::Tag::Ground:
          if (s.ground.mult() == Multiplicity::lin()) blame_lowering(c, cc);
          break;
      }
    }
    return true;
  }

  // The equation of `c` needs its variable to be lin, but a subkinding
  // constraint forced it to un. That constraint is the one reported.
  [[noreturn]] void blame_lowering(std::size_t c, const Compiled& cc) const {
    std::size_t by = lowered_by_[cc.mult_var];
    if (by == kNone)
      fail(c, "lub(...) = 1", pretty(Multiplicity::var(mult_ids_[cc.mult_var])) + " = *");
    const Compiled& sub = compiled_[by];
    fail(by, pretty(Kind::concrete(Multiplicity::lin(), sub.lhs.pre)), pretty(value(sub.rhs)));
  }

  static constexpr std::size_t kNone = static_cast<std::size_t>(-1);

  std::span<const Constraint> constraints_;
  SolverConfig config_;
  std::vector<std::size_t> lowered_by_;
  std::map<std::uint32_t, std::uint32_t> kind_index_, mult_index_;
  std::vector<std::uint32_t> kind_ids_, mult_ids_;
  std::vector<Kind> kinds_;
  std::vector<Multiplicity> mults_;
  std::vector<Compiled> compiled_;
  // Constraints mentioning each variable.
  std::vector<std::vector<std::size_t>> kind_readers_, mult_readers_;
  std::vector<char> queued_;
  std::vector<std::size_t> next_;
  std::size_t visiting_ = kNone;
  std::size_t bound_ = 0;
  SolveResult result_;
};

}  // namespace

SolveResult solve(std::span<const Constraint> constraints, const SolverConfig& config) {
  return FixpointSolver(constraints, config).run();
}

std::optional<Solution> brute_force_solve(std::span<const Constraint> constraints) {
  constexpr std::size_t kLimit = 6;
  VariableSet vars = variables_of(constraints);
  if (vars.kind_vars.size() > kLimit || vars.mult_vars.size() > kLimit)
    throw Error(ErrorCode::TooLarge, {},
                fmt::format("{} kind and {} multiplicity variables exceed the limit of {} each", vars.kind_vars.size(),
                            vars.mult_vars.size(), kLimit));

  std::map<std::uint32_t, std::size_t> kidx, midx;
  for (std::size_t i = 0; i < vars.kind_vars.size(); ++i) kidx[vars.kind_vars[i]] = i;
  for (std::size_t i = 0; i < vars.mult_vars.size(); ++i) midx[vars.mult_vars[i]] = i;
  std::size_t nk = vars.kind_vars.size(), nm = vars.mult_vars.size();

  // Kind term: -1 for ground, else variable index; multiplicity variables
  // are offset by nk in a combined assignment vector.
  struct Term {
    int var = -1;
    Kind ground = Kind::su();
    Prekind pre = Prekind::S;
    bool mult = false;
  };
  auto term = [&](Kind k) -> Term {
    if (k.is_var()) return {static_cast<int>(kidx.at(k.var_id())), Kind::su(), Prekind::S, false};
    if (k.mult().is_var()) return {static_cast<int>(midx.at(k.mult().var_id())), Kind::su(), k.prekind(), true};
    return {-1, k, Prekind::S, false};
  };
  struct Dense {
    bool sub;
    Term lhs, rhs;
    std::size_t var;
    std::vector<Term> args;
  };
  std::vector<Dense> dense;
  for (const auto& c : constraints) {
    if (c.is_sub())
      dense.push_back({true, term(c.as_sub().lhs), term(c.as_sub().rhs), 0, {}});
    else {
      Dense d{false, {}, {}, midx.at(c.as_mult_eq().var), {}};
      for (Kind k : c.as_mult_eq().args) d.args.push_back(term(k));
      dense.push_back(std::move(d));
    }
  }

  std::vector<Kind> ks(nk);
  std::vector<Multiplicity> ms(nm);
  auto value = [&](const Term& t) {
    if (t.var < 0) return t.ground;
    if (t.mult) return Kind::concrete(ms[static_cast<std::size_t>(t.var)], t.pre);
    return ks[static_cast<std::size_t>(t.var)];
  };
  auto holds = [&] {
    for (const Dense& d : dense) {
      if (d.sub) {
        if (!lattice::subkind(value(d.lhs), value(d.rhs))) return false;
      } else {
        bool any_lin = false;
        for (const Term& t : d.args) any_lin = any_lin || value(t).mult() == Multiplicity::lin();
        if ((ms[d.var] == Multiplicity::lin()) != any_lin) return false;
      }
    }
    return true;
  };

  std::optional<std::pair<std::vector<Kind>, std::vector<Multiplicity>>> best;
  std::size_t total = (std::size_t{1} << (2 * nk)) << nm;
  for (std::size_t code = 0; code < total; ++code) {
    std::size_t rest = code;
    for (std::size_t i = 0; i < nk; ++i, rest >>= 2) ks[i] = kGroundKinds[rest & 3];
    for (std::size_t i = 0; i < nm; ++i, rest >>= 1) ms[i] = (rest & 1) ? Multiplicity::lin() : Multiplicity::un();
    if (!holds()) continue;
    if (!best) {
      best.emplace(ks, ms);
      continue;
    }
    for (std::size_t i = 0; i < nk; ++i) best->first[i] = lattice::lub(best->first[i], ks[i]);
    for (std::size_t i = 0; i < nm; ++i) best->second[i] = lattice::mult_lub(std::vector{best->second[i], ms[i]});
  }
  if (!best) return std::nullopt;

  Solution s;
  for (std::size_t i = 0; i < nk; ++i) s.kind_vars[vars.kind_vars[i]] = best->first[i];
  for (std::size_t i = 0; i < nm; ++i) s.mult_vars[vars.mult_vars[i]] = best->second[i];
  return s;
}

}  // namespace kindforge
