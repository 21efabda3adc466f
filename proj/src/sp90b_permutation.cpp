#include <algorithm>
#include <cmath>
#include <thread>

#include "entropy_forge/error.hpp"
#include "entropy_forge/rng.hpp"
#include "entropy_forge/sp90b.hpp"

namespace ef::sp90b {

std::size_t rank_tail(std::size_t permutations) {
  return kRankTail * permutations / kPermutations;
}

void shuffle(std::span<std::uint32_t> data, std::uint64_t seed, std::uint64_t index) {
  CounterRng rng(derive_seed(seed, index));
  for (std::size_t i = data.size(); i > 1; --i) {
    const std::size_t j = rng.below(i);
    std::swap(data[i - 1], data[j]);
  }
}

namespace {

struct Counter {
  std::uint64_t higher = 0;
  std::uint64_t equal = 0;
  std::uint64_t evaluated = 0;
  bool settled = false;  ///< pass is certain
};

bool passes(const Counter& c, std::size_t tail) {
  const std::uint64_t lower = c.evaluated - c.higher - c.equal;
  return c.higher + c.equal > tail && c.equal + lower > tail;
}

}  // namespace

std::vector<PermutationTestOutcome> permutation_test_suite(const Dataset& data,
                                                           const PermutationOptions& options) {
  if (options.permutations < kMinPermutations) {
    throw ParameterError("permutation count must be >= " + std::to_string(kMinPermutations));
  }
  if (data.samples.empty()) throw InsufficientDataError("permutation tests on an empty dataset");
  const StatisticEvaluator evaluator(data);
  const StatisticValues original = evaluator.evaluate(data.samples, StatisticMask().set());
  const std::size_t tail = rank_tail(options.permutations);

  std::array<Counter, kStatisticCount> counters{};
  const unsigned threads = std::max(1u, options.threads);
  // The batch size only trades wasted work against scheduling overhead; the
  // counters are merged in permutation order so results never depend on it.
  const std::size_t batch = std::max<std::size_t>(16, 4 * threads);
  std::vector<StatisticValues> values(batch);

  std::size_t next = 0;
  while (next < options.permutations) {
    StatisticMask open;
    for (std::size_t s = 0; s < kStatisticCount; ++s) open.set(s, !counters[s].settled);
    if (open.none()) break;
    const std::size_t count = std::min(batch, options.permutations - next);

    auto work = [&](unsigned worker) {
      std::vector<std::uint32_t> buffer;
      for (std::size_t i = worker; i < count; i += threads) {
        buffer = data.samples;
        shuffle(buffer, options.seed, next + i);
        values[i] = evaluator.evaluate(buffer, open);
      }
    };
    if (threads == 1) {
      work(0);
    } else {
      std::vector<std::jthread> pool;
      for (unsigned w = 0; w < threads; ++w) pool.emplace_back(work, w);
    }

    for (std::size_t i = 0; i < count; ++i) {
      for (std::size_t s = 0; s < kStatisticCount; ++s) {
        Counter& c = counters[s];
        if (c.settled) continue;
        const double v = values[i][s];
        ++c.evaluated;
        if (v > original[s]) {
          ++c.higher;
        } else if (v == original[s]) {
          ++c.equal;
        }
        if (options.early_exit && passes(c, tail)) c.settled = true;
      }
    }
    next += count;
  }

  std::vector<PermutationTestOutcome> outcomes;
  outcomes.reserve(kStatisticCount);
  for (std::size_t s = 0; s < kStatisticCount; ++s) {
    PermutationTestOutcome o;
    o.statistic_name = std::string(name(static_cast<Statistic>(s)));
    o.original_value = original[s];
    o.counter_higher = counters[s].higher;
    o.counter_equal = counters[s].equal;
    o.permutations = counters[s].evaluated;
    o.pass = passes(counters[s], tail);
    outcomes.push_back(std::move(o));
  }
  return outcomes;
}

}  // namespace ef::sp90b
