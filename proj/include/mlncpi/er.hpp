#pragma once

// Synthetic entity-resolution benchmark: records drawn from a planted
// clustering, bucketed pairwise similarity as evidence, a hidden sameBib
// match predicate and hard transitivity.

#include <cstdint>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlncpi/problem.hpp"
#include "mlncpi/random.hpp"

namespace mlncpi {

struct ErParams {
  int n_records = 10;
  int n_entities = 3;
  double noise = 0.2;
  std::uint64_t seed = 0;
};

struct ErInstance {
  std::string mln;
  std::string db;
  std::vector<int> entity;  // planted cluster of each record

  std::string record_name(int i) const { return name(i, static_cast<int>(entity.size())); }

  static std::string name(int i, int n) {
    int width = 2;
    for (int m = 100; n > m; m *= 10) ++width;
    std::string digits = std::to_string(i);
    return "r" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(digits.size()))), '0') + digits;
  }

  bool gold_match(int i, int j) const { return i != j && entity.at(static_cast<std::size_t>(i)) == entity.at(static_cast<std::size_t>(j)); }

  Problem problem() const { return Problem::from_text(mln, db); }
};

inline const char* er_model_text() {
  return "// entity resolution over bibliography records\n"
         "predicate sameBib(rec, rec)\n"
         "observed simHigh(rec, rec)\n"
         "observed simMid(rec, rec)\n"
         "observed simLow(rec, rec)\n"
         "\n"
         "2.0 simHigh(v1, v2) => sameBib(v1, v2)\n"
         "0.4 simMid(v1, v2) => sameBib(v1, v2)\n"
         "1.5 simLow(v1, v2) => !sameBib(v1, v2)\n"
         "v1 != v2 ^ v2 != v3 ^ v1 != v3 ^ sameBib(v1, v2) ^ sameBib(v2, v3) => sameBib(v1, v3).\n";
}

// Records 0..n_entities-1 seed one entity each; the rest join a uniformly
// random entity. Each unordered pair gets one similarity bucket: with
// probability noise a uniform one, otherwise high for matches and low for
// non-matches. Evidence is symmetric.
inline ErInstance gen_er(const ErParams& p) {
  if (p.n_records < 1) throw std::invalid_argument("n_records must be positive");
  if (p.n_entities < 1 || p.n_entities > p.n_records) throw std::invalid_argument("need 1 <= n_entities <= n_records");
  if (!(p.noise >= 0.0 && p.noise <= 1.0)) throw std::invalid_argument("noise must lie in [0, 1]");

  ErInstance inst;
  std::mt19937_64 clusters(stream_seed(p.seed, "er.clusters"));
  std::mt19937_64 evidence(stream_seed(p.seed, "er.evidence"));
  std::uniform_int_distribution<int> pick_entity(0, p.n_entities - 1);
  for (int i = 0; i < p.n_records; ++i) inst.entity.push_back(i < p.n_entities ? i : pick_entity(clusters));

  std::ostringstream mln;
  mln << "type rec = {";
  for (int i = 0; i < p.n_records; ++i) mln << (i ? ", " : "") << ErInstance::name(i, p.n_records);
  mln << "}\n" << er_model_text();
  inst.mln = mln.str();

  static const char* const kBuckets[] = {"simHigh", "simMid", "simLow"};
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> pick_bucket(0, 2);
  std::ostringstream db;
  for (int i = 0; i < p.n_records; ++i) {
    for (int j = i + 1; j < p.n_records; ++j) {
      int bucket = inst.gold_match(i, j) ? 0 : 2;
      if (coin(evidence) < p.noise) bucket = pick_bucket(evidence);
      std::string a = ErInstance::name(i, p.n_records);
      std::string b = ErInstance::name(j, p.n_records);
      db << kBuckets[bucket] << '(' << a << ", " << b << ")\n";
      db << kBuckets[bucket] << '(' << b << ", " << a << ")\n";
    }
  }
  inst.db = db.str();
  return inst;
}

struct PairF1 {
  std::size_t tp = 0, fp = 0, fn = 0;
  double precision() const { return tp + fp == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fp); }
  double recall() const { return tp + fn == 0 ? 1.0 : static_cast<double>(tp) / static_cast<double>(tp + fn); }
  double f1() const {
    double p = precision(), r = recall();
    return p + r == 0.0 ? 0.0 : 2.0 * p * r / (p + r);
  }
};

// Pairwise-match F1 of sameBib over ordered pairs i != j.
inline PairF1 er_f1(const ErInstance& inst, const Problem& problem, const World& world) {
  PairF1 m;
  auto pred = problem.signature().find_predicate("sameBib");
  if (!pred) throw std::invalid_argument("model has no sameBib predicate");
  const int n = static_cast<int>(inst.entity.size());
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i == j) continue;
      std::vector<ConstantId> args{*problem.signature().find_constant(ErInstance::name(i, n)),
                                   *problem.signature().find_constant(ErInstance::name(j, n))};
      bool predicted = world.get(problem.atoms().id(*pred, args));
      bool gold = inst.gold_match(i, j);
      if (predicted && gold) ++m.tp;
      if (predicted && !gold) ++m.fp;
      if (!predicted && gold) ++m.fn;
    }
  }
  return m;
}

}  // namespace mlncpi
