#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <random>
#include <unordered_map>

#include "doctest.h"

#include "distmin/exec/collection.hpp"
#include "support/random.hpp"

using namespace distmin;
using namespace distmin::exec;

namespace {

using IntCollection = PartitionedCollection<std::int64_t, double>;

PartitionerPtr<std::int64_t> hashed(std::size_t n) { return std::make_shared<HashPartitioner<std::int64_t>>(n); }

IntCollection numbered(std::size_t count, std::size_t partitions) {
  std::vector<IntCollection::Element> elems;
  for (std::size_t i = 0; i < count; ++i) elems.emplace_back(static_cast<std::int64_t>(i), static_cast<double>(i + 1));
  return IntCollection::from_elements(std::move(elems), hashed(partitions));
}

template <class K, class V>
bool same_layout_and_values(const PartitionedCollection<K, V>& a, const PartitionedCollection<K, V>& b) {
  if (a.num_partitions() != b.num_partitions()) return false;
  for (std::size_t i = 0; i < a.num_partitions(); ++i) {
    if (a.partition(i) != b.partition(i)) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("partitioners map keys deterministically") {
  BlockPartitioner block(4, 10);
  for (std::int64_t k = 0; k < 4; ++k) CHECK(block.partition(k) == static_cast<std::size_t>(k));
  CHECK_THROWS_AS(block.partition(4), IndexOutOfRange);

  GridPartitioner grid(3, 5);
  std::vector<int> hit(15, 0);
  for (std::int64_t j = 0; j < 3; ++j) {
    for (std::int64_t i = 0; i < 5; ++i) {
      const auto p = grid.partition(CellKey{j, i});
      CHECK(p == static_cast<std::size_t>(j * 5 + i));
      ++hit[p];
    }
  }
  CHECK(std::all_of(hit.begin(), hit.end(), [](int h) { return h == 1; }));

  HashPartitioner<std::int64_t> h1(7), h2(7);
  for (std::int64_t k = -50; k < 50; ++k) CHECK(h1.partition(k) == h2.partition(k));
  CHECK(h1.same_as(h2));
  CHECK_FALSE(h1.same_as(HashPartitioner<std::int64_t>(8)));
}

TEST_CASE("map_partitions") {
  auto c = numbered(3, 3);

  SUBCASE("identity") {
    auto out = map_partitions(c, [](std::size_t, const IntCollection::Partition& p) { return p; });
    CHECK(same_layout_and_values(out, c));
  }

  SUBCASE("multiply by two keeps layout") {
    auto out = map_values(c, [](std::int64_t, double v) { return 2 * v; });
    REQUIRE(out.num_partitions() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
      REQUIRE(out.partition(i).size() == c.partition(i).size());
      for (std::size_t k = 0; k < c.partition(i).size(); ++k) {
        CHECK(out.partition(i)[k].first == c.partition(i)[k].first);
        CHECK(out.partition(i)[k].second == 2 * c.partition(i)[k].second);
      }
    }
    auto all = out.collect();
    std::vector<double> values;
    for (auto& e : all) values.push_back(e.second);
    std::sort(values.begin(), values.end());
    CHECK(values == std::vector<double>{2, 4, 6});
  }

  SUBCASE("sort within partition is idempotent and matches per-partition sort") {
    std::mt19937_64 rng(11);
    std::vector<IntCollection::Element> elems;
    for (int i = 0; i < 500; ++i) {
      elems.emplace_back(i, std::uniform_real_distribution<double>(-5, 5)(rng));
    }
    auto big = IntCollection::from_elements(elems, hashed(6));
    auto sorter = [](std::size_t, const IntCollection::Partition& p) {
      auto q = p;
      std::stable_sort(q.begin(), q.end(), [](auto& a, auto& b) { return a.second < b.second; });
      return q;
    };
    auto once = map_partitions(big, sorter);
    auto twice = map_partitions(once, sorter);
    CHECK(same_layout_and_values(once, twice));
    for (std::size_t i = 0; i < 6; ++i) {
      std::vector<double> expect;
      for (auto& e : elems) {
        if (HashPartitioner<std::int64_t>(6).partition(e.first) == i) expect.push_back(e.second);
      }
      std::sort(expect.begin(), expect.end());
      std::vector<double> got;
      for (auto& e : once.partition(i)) got.push_back(e.second);
      CHECK(got == expect);
    }
  }
}

TEST_CASE("zip_partitions") {
  auto a = numbered(40, 5);

  SUBCASE("add to itself doubles") {
    auto out = zip_partitions(a, a, [](std::size_t, const IntCollection::Partition& x, const IntCollection::Partition& y) {
      IntCollection::Partition r;
      for (std::size_t k = 0; k < x.size(); ++k) r.emplace_back(x[k].first, x[k].second + y[k].second);
      return r;
    });
    auto got = out.collect();
    auto src = a.collect();
    for (std::size_t k = 0; k < got.size(); ++k) CHECK(got[k].second == 2 * src[k].second);
  }

  SUBCASE("mismatched partition counts") {
    auto b = numbered(40, 4);
    auto c = numbered(40, 5);
    auto noop = [](std::size_t, const IntCollection::Partition& x, const IntCollection::Partition&) { return x; };
    CHECK_THROWS_AS(zip_partitions(b, c, noop), PartitionerMismatch);
  }

  SUBCASE("elementwise max matches dense oracle") {
    std::mt19937_64 rng(3);
    auto va = testing::uniform_vector(rng, 1000);
    auto vb = testing::uniform_vector(rng, 1000);
    std::vector<IntCollection::Element> ea, eb;
    for (std::size_t i = 0; i < va.size(); ++i) {
      ea.emplace_back(static_cast<std::int64_t>(i), va[i]);
      eb.emplace_back(static_cast<std::int64_t>(i), vb[i]);
    }
    auto ca = IntCollection::from_elements(ea, hashed(9));
    auto cb = IntCollection::from_elements(eb, hashed(9));
    auto out = zip_partitions(ca, cb, [](std::size_t, const IntCollection::Partition& x, const IntCollection::Partition& y) {
      IntCollection::Partition r;
      for (std::size_t k = 0; k < x.size(); ++k) r.emplace_back(x[k].first, std::max(x[k].second, y[k].second));
      return r;
    });
    for (auto& [k, v] : out.collect()) CHECK(v == std::max(va[k], vb[k]));
  }
}

TEST_CASE("reduce_by_key") {
  SUBCASE("small fold") {
    auto c = IntCollection::from_elements({{0, 1.0}, {0, 2.0}, {1, 3.0}}, hashed(2));
    auto r = reduce_by_key(c, [](double x, double y) { return x + y; });
    std::map<std::int64_t, double> got;
    for (auto& [k, v] : r.collect()) got[k] = v;
    CHECK(got == std::map<std::int64_t, double>{{0, 3.0}, {1, 3.0}});
  }

  SUBCASE("single key") {
    std::vector<IntCollection::Element> elems(250, {42, 1.0});
    auto r = reduce_by_key(IntCollection::from_elements(elems, hashed(4)), [](double x, double y) { return x + y; });
    REQUIRE(r.count() == 1);
    CHECK(r.collect().front().second == 250.0);
  }

  SUBCASE("random pairs vs hash-map oracle") {
    std::mt19937_64 rng(17);
    std::uniform_int_distribution<std::int64_t> key(0, 499);
    std::vector<IntCollection::Element> elems;
    std::unordered_map<std::int64_t, double> oracle;
    for (int n = 0; n < 10000; ++n) {
      const auto k = key(rng);
      const double v = std::uniform_real_distribution<double>(-1, 1)(rng);
      elems.emplace_back(k, v);
      oracle[k] += v;
    }
    // Spread the input over 16 partitions by position, then reduce to a
    // hash layout.
    std::vector<IntCollection::Partition> parts(16);
    for (std::size_t i = 0; i < elems.size(); ++i) parts[i % 16].push_back(elems[i]);
    std::vector<IntCollection::Element> flat;
    for (auto& p : parts) flat.insert(flat.end(), p.begin(), p.end());
    auto c = IntCollection::from_elements(flat, hashed(16));
    auto r = reduce_by_key(c, [](double x, double y) { return x + y; });
    CHECK(r.count() == oracle.size());
    for (auto& [k, v] : r.collect()) CHECK(testing::relative_error(v, oracle.at(k)) < 1e-12);
  }

  SUBCASE("integer addition equals sequential grouped fold exactly") {
    std::mt19937_64 rng(5);
    std::vector<IntCollection::Element> elems;
    std::unordered_map<std::int64_t, double> oracle;
    for (int n = 0; n < 5000; ++n) {
      const auto k = std::uniform_int_distribution<std::int64_t>(0, 99)(rng);
      const double v = static_cast<double>(std::uniform_int_distribution<int>(-1000, 1000)(rng));
      elems.emplace_back(k, v);
      oracle[k] += v;
    }
    auto r = reduce_by_key(IntCollection::from_elements(elems, hashed(7)), [](double x, double y) { return x + y; },
                           hashed(3));
    CHECK(r.num_partitions() == 3);
    for (auto& [k, v] : r.collect()) CHECK(v == oracle.at(k));
  }
}

TEST_CASE("tree_aggregate") {
  auto plus = [](double a, double b) { return a + b; };
  auto seq = [](double acc, const IntCollection::Element& e) { return acc + e.second; };

  SUBCASE("empty collection yields zero") {
    auto c = IntCollection::from_elements({}, hashed(5));
    CHECK(tree_aggregate(c, 0.0, seq, plus, 2) == 0.0);
    CHECK(tree_aggregate(c, 7.5, [](double a, const auto&) { return a; }, [](double a, double) { return a; }, 2) == 7.5);
  }

  SUBCASE("sum 1..100 over 8 partitions") {
    auto c = numbered(100, 8);
    CHECK(tree_aggregate(c, 0.0, seq, plus, 2) == 5050.0);
  }

  SUBCASE("dot aggregation vs sequential dot") {
    std::mt19937_64 rng(23);
    const std::size_t n = 100000;
    auto a = testing::uniform_vector(rng, n);
    auto b = testing::uniform_vector(rng, n);
    double seq_dot = 0;
    for (std::size_t i = 0; i < n; ++i) seq_dot += a[i] * b[i];
    std::vector<IntCollection::Element> elems;
    for (std::size_t i = 0; i < n; ++i) elems.emplace_back(static_cast<std::int64_t>(i), a[i] * b[i]);
    auto c = IntCollection::from_elements(elems, hashed(32));
    for (std::size_t depth : {1, 2, 3, 5}) {
      CHECK(testing::relative_error(tree_aggregate(c, 0.0, seq, plus, depth), seq_dot) < 1e-12);
    }
  }

  SUBCASE("different depths agree") {
    std::mt19937_64 rng(29);
    auto vals = testing::uniform_vector(rng, 200000, 0.0, 1.0);
    std::vector<IntCollection::Element> elems;
    for (std::size_t i = 0; i < vals.size(); ++i) elems.emplace_back(static_cast<std::int64_t>(i), vals[i]);
    auto c = IntCollection::from_elements(elems, hashed(64));
    const double d1 = tree_aggregate(c, 0.0, seq, plus, 1);
    for (std::size_t depth = 2; depth <= 6; ++depth) {
      CHECK(testing::relative_error(tree_aggregate(c, 0.0, seq, plus, depth), d1) < 1e-10);
    }
  }

  SUBCASE("fan-in is a function of (partitions, depth)") {
    CHECK(tree_fan_in(64, 2) == 8);
    CHECK(tree_fan_in(64, 3) >= 4);
    CHECK(tree_fan_in(1, 4) == 2);
  }
}

TEST_CASE("persist, unpersist and checkpoint") {
  auto c = numbered(20, 4);

  SUBCASE("checkpoint keeps contents") {
    auto cp = c.checkpoint();
    CHECK(same_layout_and_values(cp, c));
  }

  SUBCASE("lineage resets after seven maps") {
    auto d = c;
    for (int i = 0; i < 7; ++i) d = map_values(d, [](std::int64_t, double v) { return v + 1; });
    CHECK(d.lineage_depth() == 7);
    CHECK(d.checkpoint().lineage_depth() == 0);
  }

  SUBCASE("persisted contents are a snapshot of the source") {
    std::vector<IntCollection::Element> source{{0, 1.0}, {1, 2.0}, {2, 3.0}};
    auto p = IntCollection::from_elements(source, hashed(2));
    p.persist();
    const auto before = p.collect();
    for (auto& e : source) e.second = -99.0;
    CHECK(p.collect() == before);
  }

  SUBCASE("unpersist on a non-persisted collection is a no-op") {
    const auto before = Engine::global().stats().unpersists;
    c.unpersist();
    CHECK(Engine::global().stats().unpersists == before);
    c.persist();
    CHECK(c.is_persisted());
    c.unpersist();
    CHECK_FALSE(c.is_persisted());
    CHECK(Engine::global().stats().unpersists == before + 1);
  }
}

TEST_CASE("pipelines are bit-reproducible across runs and worker counts") {
  auto pipeline = [] {
    std::mt19937_64 rng(99);
    std::vector<IntCollection::Element> elems;
    for (int n = 0; n < 20000; ++n) {
      elems.emplace_back(std::uniform_int_distribution<std::int64_t>(0, 999)(rng),
                         std::uniform_real_distribution<double>(-1, 1)(rng));
    }
    auto c = IntCollection::from_elements(elems, hashed(13));
    auto m = map_values(c, [](std::int64_t k, double v) { return v * static_cast<double>(k % 7) + 0.1; });
    auto r = reduce_by_key(m, [](double x, double y) { return x + y; }, hashed(5));
    return tree_aggregate(
        r, 0.0, [](double acc, const auto& e) { return acc + e.second * e.second; },
        [](double a, double b) { return a + b; }, 3);
  };
  const double first = pipeline();
  CHECK(pipeline() == first);
  Engine::configure(EngineConfig{4, 2});
  CHECK(pipeline() == first);
  Engine::configure(EngineConfig{1, 2});
  CHECK(pipeline() == first);
  Engine::configure(EngineConfig{});
}

TEST_CASE("engine configuration file and environment overrides") {
  const auto path = std::filesystem::temp_directory_path() / "distmin_engine_test.json";
  {
    std::ofstream out(path);
    out << R"({"workers": 3, "tree_depth": 4})";
  }
  ::unsetenv("DISTMIN_WORKERS");
  ::unsetenv("DISTMIN_TREE_DEPTH");
  auto cfg = load_engine_config(path);
  CHECK(cfg.workers == 3);
  CHECK(cfg.tree_depth == 4);
  ::setenv("DISTMIN_TREE_DEPTH", "6", 1);
  cfg = load_engine_config(path);
  CHECK(cfg.tree_depth == 6);
  ::setenv("DISTMIN_WORKERS", "zero", 1);
  CHECK_THROWS_AS(load_engine_config(path), InvalidArgument);
  ::unsetenv("DISTMIN_WORKERS");
  ::unsetenv("DISTMIN_TREE_DEPTH");
  std::filesystem::remove(path);
}

TEST_CASE("collection constructor rejects misplaced elements") {
  std::vector<IntCollection::Partition> parts(2);
  auto p = hashed(2);
  const std::int64_t key = 10;
  parts[1 - p->partition(key)].emplace_back(key, 1.0);
  CHECK_THROWS_AS(IntCollection(parts, p), PartitionerMismatch);
}
