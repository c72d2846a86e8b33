#pragma once

// The two-formula agent/left model used throughout the tests.

#include <string>
#include <string_view>
#include <vector>

#include "mlncpi/problem.hpp"

namespace mlncpi::testing {

inline constexpr std::string_view kToyModel =
    "type node = {n1, n2}\n"
    "predicate agent(node)\n"
    "observed left(node)\n"
    "2.5 agent(v1) => left(v1)\n"
    "1.2 v1 != v2 ^ agent(v1) => !agent(v2)\n";

inline Problem toy(std::string_view evidence = "left(n1)\n") { return Problem::from_text(kToyModel, evidence); }

inline ConstantId constant(const Problem& p, std::string_view name) { return p.signature().find_constant(name).value(); }

inline Tuple tuple(const Problem& p, std::initializer_list<std::string_view> names) {
  Tuple t;
  for (auto n : names) t.push_back(constant(p, n));
  return t;
}

inline AtomId hidden(const Problem& p, std::string_view pred, std::initializer_list<std::string_view> args) {
  return p.atoms().id(p.signature().find_predicate(pred).value(), tuple(p, args));
}

inline World world_of(const Problem& p, std::initializer_list<AtomId> true_atoms) {
  World w = p.empty_world();
  for (AtomId a : true_atoms) w.set(a, true);
  return w;
}

}  // namespace mlncpi::testing
