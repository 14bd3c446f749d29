#pragma once

#include <atomic>
#include <cstddef>
#include <filesystem>
#include <functional>
#include <memory>

namespace distmin::exec {

struct EngineConfig {
  std::size_t workers = 0;     // 0 = hardware concurrency
  std::size_t tree_depth = 2;  // default treeAggregate depth
};

// Reads {"workers": n, "tree_depth": d} from a JSON file (missing keys keep
// their defaults), then applies DISTMIN_WORKERS / DISTMIN_TREE_DEPTH.
EngineConfig load_engine_config(const std::filesystem::path& path);
EngineConfig engine_config_from_env(EngineConfig base = {});

struct EngineStats {
  std::size_t tasks = 0;
  std::size_t persists = 0;
  std::size_t unpersists = 0;
  std::size_t checkpoints = 0;
};

// In-process partition executor. Partition tasks of one operation run on a
// worker pool; the call returns once all of them have finished.
class Engine {
 public:
  explicit Engine(EngineConfig config = {});
  ~Engine();
  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  const EngineConfig& config() const { return config_; }
  std::size_t workers() const;

  // Runs task(i) for i in [0, n). If several tasks throw, the exception of
  // the lowest index is rethrown so failures do not depend on scheduling.
  void parallel_for(std::size_t n, const std::function<void(std::size_t)>& task);

  EngineStats stats() const;
  void note_persist() { persists_.fetch_add(1, std::memory_order_relaxed); }
  void note_unpersist() { unpersists_.fetch_add(1, std::memory_order_relaxed); }
  void note_checkpoint() { checkpoints_.fetch_add(1, std::memory_order_relaxed); }

  // Process-wide engine used by every collection operation.
  static Engine& global();
  static void configure(EngineConfig config);

 private:
  struct Arena;
  EngineConfig config_;
  std::unique_ptr<Arena> arena_;
  std::atomic<std::size_t> tasks_{0};
  std::atomic<std::size_t> persists_{0};
  std::atomic<std::size_t> unpersists_{0};
  std::atomic<std::size_t> checkpoints_{0};
};

}  // namespace distmin::exec
