#include <algorithm>
#include <limits>
#include <map>
#include <numeric>

#include "jobshoplab/bench.hpp"
#include "jobshoplab/errors.hpp"

namespace jsl {

namespace {

struct Problem {
  int jobs = 0;
  int machines = 0;
  std::vector<std::vector<int>> mach;
  std::vector<std::vector<Tick>> proc;
  std::vector<std::vector<Tick>> tail;  // work after the op in its job
};

Problem build(const Instance& inst) {
  Problem p;
  std::map<std::string, int> index;
  for (const auto& m : inst.machines) index.emplace(m.id, static_cast<int>(index.size()));
  p.jobs = static_cast<int>(inst.jobs.size());
  p.machines = static_cast<int>(inst.machines.size());
  for (const auto& j : inst.jobs) {
    std::vector<int> ms;
    std::vector<Tick> ps;
    for (const auto& op : j.ops) {
      ms.push_back(index.at(op.machine));
      ps.push_back(op.duration);
    }
    std::vector<Tick> tl(ps.size(), 0);
    for (int k = static_cast<int>(ps.size()) - 2; k >= 0; --k) tl[k] = tl[k + 1] + ps[k + 1];
    p.mach.push_back(std::move(ms));
    p.proc.push_back(std::move(ps));
    p.tail.push_back(std::move(tl));
  }
  return p;
}

// Depth-first branch and bound over Giffler-Thompson active schedules.
class Search {
 public:
  explicit Search(const Problem& p) : p_(p) {
    next_.assign(p.jobs, 0);
    job_ready_.assign(p.jobs, 0);
    mach_ready_.assign(p.machines, 0);
    starts_.resize(p.jobs);
    for (int j = 0; j < p.jobs; ++j) starts_[j].assign(p.mach[j].size(), -1);
    for (int j = 0; j < p.jobs; ++j) left_ += static_cast<int>(p.mach[j].size());
  }

  void run() { dfs(); }

  Tick best = std::numeric_limits<Tick>::max();
  std::vector<std::vector<Tick>> best_starts;
  std::int64_t nodes = 0;

 private:
  struct Task {
    Tick head, proc, tail;
  };

  /// Preemptive one-machine bound: largest tail first, release dates respected.
  static Tick jackson(std::vector<Task>& tasks) {
    std::sort(tasks.begin(), tasks.end(), [](const Task& a, const Task& b) { return a.head < b.head; });
    std::vector<Task> ready;  // heap on tail
    auto cmp = [](const Task& a, const Task& b) { return a.tail < b.tail; };
    Tick t = 0, bound = 0;
    std::size_t i = 0;
    while (i < tasks.size() || !ready.empty()) {
      if (ready.empty()) t = std::max(t, tasks[i].head);
      while (i < tasks.size() && tasks[i].head <= t) {
        ready.push_back(tasks[i++]);
        std::push_heap(ready.begin(), ready.end(), cmp);
      }
      std::pop_heap(ready.begin(), ready.end(), cmp);
      Task cur = ready.back();
      ready.pop_back();
      const Tick until = i < tasks.size() ? std::min(t + cur.proc, tasks[i].head) : t + cur.proc;
      cur.proc -= until - t;
      t = until;
      if (cur.proc > 0) {
        ready.push_back(cur);
        std::push_heap(ready.begin(), ready.end(), cmp);
      } else {
        bound = std::max(bound, t + cur.tail);
      }
    }
    return bound;
  }

  Tick lower_bound() const {
    Tick lb = 0;
    std::vector<std::vector<Task>> per_machine(static_cast<std::size_t>(p_.machines));
    for (int j = 0; j < p_.jobs; ++j) {
      Tick head = job_ready_[j];
      const int n = static_cast<int>(p_.mach[j].size());
      for (int k = next_[j]; k < n; ++k) {
        const int m = p_.mach[j][k];
        const Tick h = std::max(head, mach_ready_[m]);
        per_machine[m].push_back({h, p_.proc[j][k], p_.tail[j][k]});
        head = h + p_.proc[j][k];
      }
      lb = std::max(lb, head);
    }
    for (auto& tasks : per_machine)
      if (!tasks.empty()) lb = std::max(lb, jackson(tasks));
    return lb;
  }

  void dfs() {
    ++nodes;
    if (left_ == 0) {
      const Tick c = *std::max_element(job_ready_.begin(), job_ready_.end());
      if (c < best) {
        best = c;
        best_starts = starts_;
      }
      return;
    }
    if (lower_bound() >= best) return;

    // Operation with the earliest completion fixes the machine to branch on.
    Tick c_star = std::numeric_limits<Tick>::max();
    int m_star = -1;
    for (int j = 0; j < p_.jobs; ++j) {
      if (next_[j] >= static_cast<int>(p_.mach[j].size())) continue;
      const int m = p_.mach[j][next_[j]];
      const Tick ect = std::max(job_ready_[j], mach_ready_[m]) + p_.proc[j][next_[j]];
      if (ect < c_star) {
        c_star = ect;
        m_star = m;
      }
    }
    std::vector<std::pair<std::pair<Tick, Tick>, int>> conflict;
    for (int j = 0; j < p_.jobs; ++j) {
      if (next_[j] >= static_cast<int>(p_.mach[j].size()) || p_.mach[j][next_[j]] != m_star) continue;
      const Tick est = std::max(job_ready_[j], mach_ready_[m_star]);
      if (est < c_star) conflict.push_back({{est, -(p_.tail[j][next_[j]] + p_.proc[j][next_[j]])}, j});
    }
    std::sort(conflict.begin(), conflict.end());

    for (const auto& [key, j] : conflict) {
      const int k = next_[j];
      const Tick start = key.first;
      const Tick saved_job = job_ready_[j], saved_mach = mach_ready_[m_star];
      starts_[j][k] = start;
      job_ready_[j] = mach_ready_[m_star] = start + p_.proc[j][k];
      ++next_[j];
      --left_;
      dfs();
      ++left_;
      --next_[j];
      job_ready_[j] = saved_job;
      mach_ready_[m_star] = saved_mach;
      starts_[j][k] = -1;
    }
  }

  const Problem& p_;
  std::vector<int> next_;
  std::vector<Tick> job_ready_;
  std::vector<Tick> mach_ready_;
  std::vector<std::vector<Tick>> starts_;
  int left_ = 0;
};

}  // namespace

ExactResult brute_force_optimal(const Instance& inst, bool force) {
  const std::size_t ops = inst.total_operations();
  if (ops > kExactOpLimit && !force)
    throw SizeGuardError("instance has " + std::to_string(ops) + " operations; the exact solver is limited to " +
                         std::to_string(kExactOpLimit) + " unless forced");
  const Problem p = build(classical_reduction(inst));
  Search search(p);
  search.run();

  ExactResult out;
  out.nodes = search.nodes;
  if (ops == 0) return out;
  out.makespan = search.best;
  out.starts = search.best_starts;
  out.machine_orders.resize(static_cast<std::size_t>(p.machines));
  std::vector<std::vector<std::pair<Tick, int>>> by_machine(static_cast<std::size_t>(p.machines));
  for (int j = 0; j < p.jobs; ++j)
    for (std::size_t k = 0; k < p.mach[j].size(); ++k) by_machine[p.mach[j][k]].push_back({out.starts[j][k], j});
  for (int m = 0; m < p.machines; ++m) {
    std::sort(by_machine[m].begin(), by_machine[m].end());
    for (const auto& [t, j] : by_machine[m]) out.machine_orders[m].push_back(j);
  }
  return out;
}

std::vector<Violation> schedule_violations(const Instance& inst, const std::vector<std::vector<Tick>>& starts) {
  const Problem p = build(inst);
  std::vector<Violation> out;
  if (static_cast<int>(starts.size()) != p.jobs) return {{"precedence", "schedule covers the wrong number of jobs"}};
  std::vector<std::vector<std::pair<Tick, Tick>>> busy(static_cast<std::size_t>(p.machines));
  for (int j = 0; j < p.jobs; ++j) {
    const auto& id = inst.jobs[j].id;
    if (starts[j].size() != p.mach[j].size()) {
      out.push_back({"precedence", id + ": wrong number of operations"});
      continue;
    }
    for (std::size_t k = 0; k < starts[j].size(); ++k) {
      if (starts[j][k] < 0) out.push_back({"precedence", id + " op " + std::to_string(k) + " has a negative start"});
      if (k > 0 && starts[j][k] < starts[j][k - 1] + p.proc[j][k - 1])
        out.push_back({"precedence", id + " op " + std::to_string(k) + " starts before op " + std::to_string(k - 1) + " ends"});
      busy[p.mach[j][k]].push_back({starts[j][k], starts[j][k] + p.proc[j][k]});
    }
  }
  for (int m = 0; m < p.machines; ++m) {
    auto& iv = busy[m];
    std::sort(iv.begin(), iv.end());
    for (std::size_t i = 1; i < iv.size(); ++i)
      if (iv[i].first < iv[i - 1].second)
        out.push_back({"overlap", inst.machines[m].id + " runs two operations at t=" + std::to_string(iv[i].first)});
  }
  return out;
}

Instance make_random_classical(int jobs, int machines, std::uint64_t seed, Tick pmin, Tick pmax) {
  if (jobs <= 0 || machines <= 0) throw ConfigError("random instance needs positive job and machine counts");
  if (pmin < 1 || pmax < pmin) throw ConfigError("random instance needs 1 <= pmin <= pmax");
  std::uint64_t state = derive_stream(seed, "random-instance");
  auto draw = [&](std::uint64_t n) {
    state = splitmix64(state);
    return state % n;
  };
  Instance inst;
  inst.name = "rand-" + std::to_string(jobs) + "x" + std::to_string(machines) + "-s" + std::to_string(seed);
  for (int m = 0; m < machines; ++m) inst.machines.push_back({"m" + std::to_string(m), std::nullopt, std::nullopt, BufferOrder::any});
  for (int j = 0; j < jobs; ++j) {
    std::vector<int> route(static_cast<std::size_t>(machines));
    std::iota(route.begin(), route.end(), 0);
    for (int i = machines - 1; i > 0; --i) std::swap(route[i], route[draw(static_cast<std::uint64_t>(i) + 1)]);
    JobSpec job;
    job.id = "j" + std::to_string(j);
    job.job_type = job.id;
    for (int m : route)
      job.ops.push_back({"m" + std::to_string(m), pmin + static_cast<Tick>(draw(static_cast<std::uint64_t>(pmax - pmin + 1)))});
    inst.jobs.push_back(std::move(job));
  }
  inst.classification = classify(inst);
  return inst;
}

}  // namespace jsl
