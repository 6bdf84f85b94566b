#include "redq/distributed_queue.hpp"

#include <algorithm>
#include <numeric>
#include <string>

#include "redq/error.hpp"

namespace redq {

std::string_view to_string(DispatchPolicy policy) {
  switch (policy) {
    case DispatchPolicy::kLeastLoaded:
      return "least-loaded";
    case DispatchPolicy::kUniformRandom:
      return "uniform-random";
    case DispatchPolicy::kRoundRobin:
      return "round-robin";
  }
  return "?";
}

DispatchPolicy parse_dispatch_policy(std::string_view text) {
  if (text == "least-loaded") return DispatchPolicy::kLeastLoaded;
  if (text == "uniform-random") return DispatchPolicy::kUniformRandom;
  if (text == "round-robin") return DispatchPolicy::kRoundRobin;
  throw ParseError("unknown dispatch policy '" + std::string(text) + "'");
}

ServerSet choose_servers(DispatchPolicy policy, const std::vector<unsigned>& loads, ServerSet eligible,
                         unsigned r, Rng& rng, ServerId& cursor) {
  std::vector<ServerId> pool = eligible.members();
  if (r > pool.size()) throw InvalidRequestDegree("request degree exceeds eligible servers");
  ServerSet chosen;
  switch (policy) {
    case DispatchPolicy::kLeastLoaded:
      std::stable_sort(pool.begin(), pool.end(),
                       [&](ServerId a, ServerId b) { return loads[a] < loads[b]; });
      for (unsigned i = 0; i < r; ++i) chosen.insert(pool[i]);
      break;
    case DispatchPolicy::kUniformRandom:
      for (unsigned i = 0; i < r; ++i) {
        const auto j = i + rng.below(pool.size() - i);
        std::swap(pool[i], pool[j]);
        chosen.insert(pool[i]);
      }
      break;
    case DispatchPolicy::kRoundRobin: {
      const auto n = static_cast<ServerId>(loads.size());
      ServerId s = cursor % n;
      while (chosen.size() < r) {
        if (eligible.contains(s)) {
          chosen.insert(s);
          cursor = (s + 1) % n;
        }
        s = (s + 1) % n;
      }
      break;
    }
  }
  return chosen;
}

DistributedQueue::DistributedQueue(unsigned n, unsigned k, DispatchPolicy policy, std::uint64_t dispatch_seed)
    : k_(k), policy_(policy), dispatch_rng_(dispatch_seed), servers_(n), buffers_(n) {
  if (n == 0 || n > kMaxServers) throw ValidationError("n must lie in [1, 64]");
  if (k == 0 || k > n) throw ValidationError("k must lie in [1, n]");
}

unsigned DistributedQueue::load(ServerId s) const {
  return static_cast<unsigned>(buffers_[s].size()) + (servers_[s].mode == ServerMode::kBusy ? 1U : 0U);
}

BatchId DistributedQueue::arrive(double now, unsigned r, ServerSet eligible, std::vector<Effect>& out) {
  const ServerSet everyone = ServerSet::all(servers());
  if (eligible.empty()) eligible = everyone;
  if (!eligible.subset_of(everyone)) throw ValidationError("eligible set names unknown servers");
  if (r < k_ || r > eligible.size()) {
    throw InvalidRequestDegree("request degree " + std::to_string(r) + " outside [k=" + std::to_string(k_) +
                               ", eligible=" + std::to_string(eligible.size()) + "]");
  }
  std::vector<unsigned> loads(servers());
  for (ServerId s = 0; s < servers(); ++s) loads[s] = load(s);
  return arrive_to(now, choose_servers(policy_, loads, eligible, r, dispatch_rng_, cursor_), out);
}

BatchId DistributedQueue::arrive_to(double now, ServerSet targets, std::vector<Effect>& out) {
  if (!targets.subset_of(ServerSet::all(servers()))) throw ValidationError("target set names unknown servers");
  if (targets.size() < k_) throw InvalidRequestDegree("fewer than k target servers");

  const BatchId id = next_id_++;
  BatchRecord& b = batches_.emplace_back();
  b.id = id;
  b.arrival_time = now;
  b.r = targets.size();
  ++in_system_;
  for (ServerId s : targets.members()) {
    if (servers_[s].mode == ServerMode::kIdle && buffers_[s].empty()) {
      assign(s, b, now, out);
    } else {
      buffers_[s].push_back(id);
      b.queued.insert(s);
      ++queued_jobs_;
    }
  }
  return id;
}

void DistributedQueue::complete(ServerId s, double now, const RemovalCost& removal, std::vector<Effect>& out) {
  if (s >= servers() || servers_[s].mode != ServerMode::kBusy) {
    throw CompletionOnNonBusyServer("completion at server " + std::to_string(s) + " which holds no job");
  }
  BatchRecord& b = at(servers_[s].batch);
  b.in_service.erase(s);
  ++b.completed;
  servers_[s] = ServerView{};

  ServerSet freed;
  freed.insert(s);
  if (b.completed == k_) {
    out.push_back(BatchDeparted{b.id, b.arrival_time, now, b.touched, b.touched.size()});
    for (ServerId sib : b.in_service.members()) {
      out.push_back(JobRemoved{sib, b.id});
      const double cost = removal ? removal(sib) : 0.0;
      if (cost > 0) {
        servers_[sib] = ServerView{ServerMode::kCooldown, 0, 0, now + cost};
        out.push_back(CooldownStarted{sib, now + cost});
      } else {
        servers_[sib] = ServerView{};
        freed.insert(sib);
      }
    }
    for (ServerId q : b.queued.members()) {
      auto& buf = buffers_[q];
      buf.erase(std::find(buf.begin(), buf.end(), b.id));
      --queued_jobs_;
      out.push_back(QueuedJobDropped{q, b.id});
    }
    b.in_service = ServerSet{};
    b.queued = ServerSet{};
    b.departed = true;
    --in_system_;
    ++departures_;
  }
  for (ServerId f : freed.members()) pull_own_head(f, now, out);
  trim();
}

void DistributedQueue::end_cooldown(ServerId s, double now, std::vector<Effect>& out) {
  if (s >= servers() || servers_[s].mode != ServerMode::kCooldown) {
    throw InvariantViolation("cooldown end at server " + std::to_string(s) + " which is not cooling down");
  }
  servers_[s] = ServerView{};
  pull_own_head(s, now, out);
}

void DistributedQueue::assign(ServerId s, BatchRecord& b, double now, std::vector<Effect>& out) {
  if (b.touched.contains(s)) {
    throw InvariantViolation("server " + std::to_string(s) + " would serve batch " + std::to_string(b.id) +
                             " twice");
  }
  b.touched.insert(s);
  b.in_service.insert(s);
  servers_[s] = ServerView{ServerMode::kBusy, b.id, now, 0};
  out.push_back(JobStarted{s, b.id});
}

void DistributedQueue::pull_own_head(ServerId s, double now, std::vector<Effect>& out) {
  auto& buf = buffers_[s];
  if (buf.empty()) {
    servers_[s] = ServerView{};
    out.push_back(ServerIdled{s});
    return;
  }
  BatchRecord& b = at(buf.front());
  buf.pop_front();
  b.queued.erase(s);
  --queued_jobs_;
  assign(s, b, now, out);
}

void DistributedQueue::trim() {
  while (!batches_.empty() && batches_.front().departed) {
    batches_.pop_front();
    ++base_;
  }
}

const DistributedQueue::BatchRecord* DistributedQueue::find_batch(BatchId id) const {
  if (id < base_ || id >= next_id_) return nullptr;
  const BatchRecord& b = batches_[id - base_];
  return b.departed ? nullptr : &b;
}

void DistributedQueue::check_invariants() const {
  const auto fail = [](const std::string& what) { throw InvariantViolation(what); };
  if (next_id_ != departures_ + in_system_) fail("conservation: arrivals != departures + in system");
  std::size_t live = 0;
  std::size_t queued = 0;
  for (const BatchRecord& b : batches_) {
    if (b.departed) continue;
    ++live;
    if (b.completed >= k_) fail("batch still present after k completions");
    if (b.touched.size() + b.queued.size() > b.r) fail("batch holds more than r jobs");
    if ((b.touched.bits() & b.queued.bits()) != 0) fail("server both queued and served the same batch");
    for (ServerId s : b.queued.members()) {
      const auto& buf = buffers_[s];
      if (std::count(buf.begin(), buf.end(), b.id) != 1) fail("queued sibling missing from its buffer");
    }
    queued += b.queued.size();
  }
  if (live != in_system_) fail("in-system counter drifted");
  if (queued != queued_jobs_) fail("queued-job counter drifted");
  for (ServerId s = 0; s < servers(); ++s) {
    const auto& buf = buffers_[s];
    if (!std::is_sorted(buf.begin(), buf.end())) fail("buffer not in arrival order");
    if (servers_[s].mode == ServerMode::kIdle && !buf.empty()) fail("idle server ignores its own buffer");
  }
}

}  // namespace redq
