// Runs the acceptance criteria and prints one PASS or FAIL line for each.
#include <fmt/format.h>

#include <chrono>
#include <functional>
#include <iostream>

#include "kindforge/driver.hpp"
#include "kindforge/exprgen.hpp"
#include "kindforge/kindgen.hpp"
#include "kindforge/lattice.hpp"
#include "support.hpp"

namespace kindforge {
namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point start) {
  return std::chrono::duration<double, std::milli>(Clock::now() - start).count();
}

struct Check {
  std::string detail;
  bool ok = true;

  void expect(bool cond, const std::string& what) {
    if (!cond && ok) detail = what;
    ok = ok && cond;
  }
};

InferResult infer_corpus_file(const std::string& name) {
  return infer_program(parse_program(testing::slurp(testing::corpus_dir() / name)));
}

std::vector<std::string> inferred(const InferResult& r) {
  std::vector<std::string> out;
  for (const auto& a : r.annotations) out.push_back(pretty(a.inferred));
  return out;
}

Check fst_solution() {
  Check c;
  auto start = Clock::now();
  InferResult r = infer_corpus_file("fst.fstk");
  double ms = ms_since(start);
  c.expect(inferred(r) == std::vector<std::string>{"1T", "*T"}, "fst sites are not 1T, *T");
  c.expect(print_program(r.annotated).find("forall a:1T . forall b:*T . (a, b) -> a") != std::string::npos,
           "annotated signature differs");
  for (const auto& section : r.sections)
    if (section.part == "body")
      for (const Constraint& k : section.constraints)
        if (!k.is_sub())
          c.expect(r.solution.mult_vars.at(k.as_mult_eq().var) == Multiplicity::lin(), "body record is not linear");
  c.expect(ms < 1000, fmt::format("took {:.0f} ms", ms));
  c.detail = c.ok ? fmt::format("{:.1f} ms", ms) : c.detail;
  return c;
}

Check fst_constraints() {
  Check c;
  InferResult r = infer_corpus_file("fst.fstk");
  const ConstraintSection* body = nullptr;
  for (const auto& s : r.sections)
    if (s.part == "body") body = &s;
  c.expect(body != nullptr, "no body section");
  if (!body) return c;
  const Kind a = Kind::var(100), b = Kind::var(101);
  const Kind m0 = Kind::concrete(Multiplicity::var(100), Prekind::T);
  const Kind m1 = Kind::concrete(Multiplicity::var(101), Prekind::T);
  std::vector<Constraint> expected = {Constraint::sub(b, m0), Constraint::sub(a, m0),
                                      Constraint::sub(b, m1), Constraint::sub(a, m1),
                                      Constraint::sub(b, Kind::tu()),
                                      Constraint::mult_eq(Multiplicity::var(100), {a, b}),
                                      Constraint::mult_eq(Multiplicity::var(101), {a, b})};
  c.expect(body->constraints.size() == 7, fmt::format("{} constraints", body->constraints.size()));
  c.expect(testing::equal_up_to_renaming(body->constraints.items(), expected), "not the expected set up to renaming");
  c.detail = c.ok ? "7 constraints" : c.detail;
  return c;
}

Check dot_generality() {
  Check c;
  InferResult plain = infer_corpus_file("dot.fstk");
  InferResult annotated = infer_corpus_file("dot_annotated.fstk");
  std::vector<std::string> lin(3, "1T");
  c.expect(inferred(plain) == lin, "dot is not 1T three times");
  c.expect(inferred(annotated) == lin, "annotated dot is not 1T three times");
  std::size_t more_general = 0;
  for (const auto& x : annotated.annotations)
    if (x.written == Kind::tu() && x.verdict == Verdict::MoreGeneral) ++more_general;
  c.expect(more_general == 3, fmt::format("{} more-general sites", more_general));
  return c;
}

Check oracle_agreement() {
  Check c;
  testing::ConstraintGen gen(20261015);
  const std::size_t n = 1000;
  std::size_t satisfiable = 0;
  auto start = Clock::now();
  for (std::size_t i = 0; i < n && c.ok; ++i) {
    std::vector<Constraint> cs = gen.next(i % 2 == 0);
    std::optional<Solution> expected = brute_force_solve(cs);
    std::optional<Solution> actual;
    try {
      actual = solve(cs).solution;
    } catch (const SolveError&) {
    }
    c.expect(actual == expected, fmt::format("set {} disagrees", i));
    if (expected) ++satisfiable;
  }
  double ms = ms_since(start);
  c.expect(2 * satisfiable >= n, fmt::format("{} of {} satisfiable", satisfiable, n));
  c.expect(ms < 30000, fmt::format("took {:.0f} ms", ms));
  c.detail = c.ok ? fmt::format("{} sets, {} satisfiable, {:.0f} ms", n, satisfiable, ms) : c.detail;
  return c;
}

// Order by table, independent of the library's product construction.
bool table_le(int a, int b) {
  // Rows and columns follow kGroundKinds: *S, 1S, *T, 1T.
  static constexpr bool le[4][4] = {{true, true, true, true},
                                    {false, true, false, true},
                                    {false, false, true, true},
                                    {false, false, false, true}};
  return le[a][b];
}

Check lattice_laws() {
  Check c;
  const auto& ks = kGroundKinds;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) {
      c.expect(lattice::subkind(ks[i], ks[j]) == table_le(i, j), "order differs from the table");
      Kind meet = lattice::glb(ks[i], ks[j]), join = lattice::lub(ks[i], ks[j]);
      c.expect(meet == lattice::glb(ks[j], ks[i]) && join == lattice::lub(ks[j], ks[i]), "not commutative");
      c.expect(lattice::glb(ks[i], join) == ks[i] && lattice::lub(ks[i], meet) == ks[i], "absorption fails");
      for (int k = 0; k < 4; ++k) {
        bool lower = table_le(k, i) && table_le(k, j);
        bool upper = table_le(i, k) && table_le(j, k);
        if (lower) c.expect(lattice::subkind(ks[k], meet), "meet is not greatest");
        if (upper) c.expect(lattice::subkind(join, ks[k]), "join is not least");
        c.expect(lattice::glb(lattice::glb(ks[i], ks[j]), ks[k]) == lattice::glb(ks[i], lattice::glb(ks[j], ks[k])),
                 "meet not associative");
        c.expect(lattice::lub(lattice::lub(ks[i], ks[j]), ks[k]) == lattice::lub(ks[i], lattice::lub(ks[j], ks[k])),
                 "join not associative");
      }
      c.expect(table_le(i, j) == (meet == ks[i]), "meet disagrees with order");
    }
  c.detail = c.ok ? "4 kinds, all triples" : c.detail;
  return c;
}

Check corpus_round_trip() {
  Check c;
  RunSummary s = run_corpus(testing::corpus_dir());
  c.expect(s.files.size() >= 15, fmt::format("{} files", s.files.size()));
  c.expect(s.ok(), fmt::format("{} failed, {} violations", s.failed, s.violations));
  std::size_t more_general = 0;
  for (const auto& f : s.files)
    for (const auto& a : f.annotations)
      if (a.verdict == Verdict::MoreGeneral) ++more_general;
  c.expect(more_general >= 1, "no more-general site");
  for (const auto& file : testing::corpus_files()) {
    std::string emitted = print_program(infer_program(parse_program(testing::slurp(file))).annotated);
    InferOptions keep;
    keep.strip = false;
    std::string again = print_program(infer_program(parse_program(emitted), keep).annotated);
    c.expect(again == emitted, file.filename().string() + " is not a fixpoint");
  }
  c.detail = c.ok ? fmt::format("{} files, {} sites, {} more general", s.files.size(), s.total, more_general)
                  : c.detail;
  return c;
}

Check scaling() {
  Check c;
  double worst = 0;
  for (const auto& file : testing::corpus_files()) {
    Program p = parse_program(testing::slurp(file));
    std::size_t nodes = 0;
    for (const Decl& d : p.decls) {
      if (const auto* a = std::get_if<TypeAbbrev>(&d))
        nodes += node_count(a->body);
      else
        nodes += node_count(std::get<ValueDecl>(d).signature) + node_count(std::get<ValueDecl>(d).body);
    }
    std::size_t constraints = 0;
    for (const auto& section : infer_program(p).sections) constraints += section.constraints.size();
    c.expect(constraints <= 4 * nodes, fmt::format("{}: {} constraints for {} nodes", file.filename().string(),
                                                   constraints, nodes));
    worst = std::max(worst, static_cast<double>(constraints) / static_cast<double>(nodes));
  }
  std::vector<Constraint> chain;
  const std::uint32_t n = 10000;
  for (std::uint32_t i = 0; i + 1 < n; ++i) chain.push_back(Constraint::sub(Kind::var(i), Kind::var(i + 1)));
  chain.push_back(Constraint::sub(Kind::var(n - 1), Kind::su()));
  auto start = Clock::now();
  SolveResult r = solve(chain);
  double ms = ms_since(start);
  c.expect(ms < 1000, fmt::format("chain took {:.0f} ms", ms));
  c.expect(r.iterations <= 2 * n + 1, fmt::format("{} iterations", r.iterations));
  c.detail = c.ok ? fmt::format("worst ratio {:.2f}, chain {:.0f} ms in {} iterations", worst, ms, r.iterations)
                  : c.detail;
  return c;
}

struct Blame {
  std::string rule;
  Span span;
};

std::optional<Blame> blame(const std::function<void(const SolverConfig&)>& run, bool optimize) {
  SolverConfig config;
  config.optimize = optimize;
  try {
    run(config);
  } catch (const SolveError& e) {
    return Blame{e.constraint().origin().rule, e.span()};
  }
  return std::nullopt;
}

Check negatives() {
  Check c;
  auto program = [](const std::string& name) {
    Program p = parse_program(testing::slurp(testing::negative_dir() / name));
    return [p](const SolverConfig& config) {
      InferOptions options;
      options.solver = config;
      infer_program(p, options);
    };
  };
  std::vector<Constraint> ground = {Constraint::sub(Kind::sl(), Kind::tu(), {"Given", {1, 1}})};
  struct Case {
    std::string name;
    std::function<void(const SolverConfig&)> run;
    std::string rule;
    Span span;
  };
  std::vector<Case> cases = {
      {"discard", program("discard_linear_unit.fstk"), "Weaken", {3, 8}},
      {"duplicate", program("duplicate_linear.fstk"), "Merge", {3, 19}},
      {"1S <: *T", [&](const SolverConfig& config) { solve(ground, config); }, "Given", {1, 1}}};
  for (const Case& k : cases) {
    std::optional<Blame> on = blame(k.run, true), off = blame(k.run, false);
    c.expect(on.has_value() && off.has_value(), k.name + " did not fail");
    if (!on || !off) continue;
    c.expect(on->rule == k.rule && on->span == k.span,
             fmt::format("{} blamed {}@{}:{}", k.name, on->rule, on->span.line, on->span.col));
    c.expect(on->rule == off->rule && on->span == off->span, k.name + " depends on optimization");
  }
  return c;
}

}  // namespace
}  // namespace kindforge

int main() {
  using namespace kindforge;
  struct Criterion {
    const char* name;
    Check (*run)();
  };
  const Criterion criteria[] = {
      {"fst solution", fst_solution},         {"fst constraint set", fst_constraints},
      {"dot generality", dot_generality},     {"solver agrees with oracle", oracle_agreement},
      {"lattice laws", lattice_laws},         {"corpus round trip", corpus_round_trip},
      {"linear scaling", scaling},            {"ill-kinded programs rejected", negatives},
  };
  int failures = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Check result;
    try {
      result = c.run();
    } catch (const std::exception& e) {
      result.ok = false;
      result.detail = std::string("exception: ") + e.what();
    }
    if (!result.ok) ++failures;
    std::cout << fmt::format("{} {}: {}{}\n", result.ok ? "PASS" : "FAIL", index, c.name,
                             result.detail.empty() ? "" : " (" + result.detail + ")");
  }
  return failures == 0 ? 0 : 1;
}
