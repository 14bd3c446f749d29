#include "distmin/exec/engine.hpp"

#include <cstdlib>
#include <exception>
#include <fstream>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include <tbb/parallel_for.h>
#include <tbb/task_arena.h>

#include "distmin/error.hpp"

namespace distmin::exec {

namespace {

std::size_t resolve_workers(std::size_t requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

std::size_t parse_positive(const char* name, const char* text) {
  char* end = nullptr;
  const long long v = std::strtoll(text, &end, 10);
  if (end == text || *end != '\0' || v <= 0) {
    throw InvalidArgument(std::string(name) + " must be a positive integer, got '" + text + "'");
  }
  return static_cast<std::size_t>(v);
}

std::mutex g_engine_mutex;
std::unique_ptr<Engine> g_engine;

}  // namespace

struct Engine::Arena {
  explicit Arena(std::size_t workers) : arena(static_cast<int>(workers)) {}
  tbb::task_arena arena;
};

EngineConfig engine_config_from_env(EngineConfig base) {
  if (const char* w = std::getenv("DISTMIN_WORKERS")) base.workers = parse_positive("DISTMIN_WORKERS", w);
  if (const char* d = std::getenv("DISTMIN_TREE_DEPTH")) {
    base.tree_depth = parse_positive("DISTMIN_TREE_DEPTH", d);
  }
  return base;
}

EngineConfig load_engine_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open engine config " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError("engine config " + path.string() + ": " + e.what());
  }
  EngineConfig cfg;
  cfg.workers = j.value("workers", cfg.workers);
  cfg.tree_depth = j.value("tree_depth", cfg.tree_depth);
  if (cfg.tree_depth == 0) throw InvalidArgument("tree_depth must be >= 1");
  return engine_config_from_env(cfg);
}

Engine::Engine(EngineConfig config)
    : config_(config), arena_(std::make_unique<Arena>(resolve_workers(config.workers))) {
  if (config_.tree_depth == 0) throw InvalidArgument("tree_depth must be >= 1");
}

Engine::~Engine() = default;

std::size_t Engine::workers() const { return static_cast<std::size_t>(arena_->arena.max_concurrency()); }

void Engine::parallel_for(std::size_t n, const std::function<void(std::size_t)>& task) {
  if (n == 0) return;
  tasks_.fetch_add(n, std::memory_order_relaxed);
  std::vector<std::exception_ptr> failures(n);
  auto run_one = [&](std::size_t i) {
    try {
      task(i);
    } catch (...) {
      failures[i] = std::current_exception();
    }
  };
  if (n == 1 || workers() == 1) {
    for (std::size_t i = 0; i < n; ++i) run_one(i);
  } else {
    arena_->arena.execute([&] { tbb::parallel_for(std::size_t{0}, n, run_one); });
  }
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
}

EngineStats Engine::stats() const {
  return EngineStats{tasks_.load(), persists_.load(), unpersists_.load(), checkpoints_.load()};
}

Engine& Engine::global() {
  std::lock_guard lock(g_engine_mutex);
  if (!g_engine) g_engine = std::make_unique<Engine>(engine_config_from_env());
  return *g_engine;
}

void Engine::configure(EngineConfig config) {
  std::lock_guard lock(g_engine_mutex);
  g_engine = std::make_unique<Engine>(config);
}

}  // namespace distmin::exec
