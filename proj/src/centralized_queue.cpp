#include "redq/centralized_queue.hpp"

#include <string>

#include "redq/error.hpp"

namespace redq {

CentralizedQueue::CentralizedQueue(unsigned n, unsigned k) : k_(k), servers_(n) {
  if (n == 0 || n > kMaxServers) throw ValidationError("n must lie in [1, 64]");
  if (k == 0 || k > n) throw ValidationError("k must lie in [1, n]");
}

BatchId CentralizedQueue::arrive(double now, unsigned r, ServerSet eligible, std::vector<Effect>& out) {
  const ServerSet everyone = ServerSet::all(servers());
  if (eligible.empty()) eligible = everyone;
  if (!eligible.subset_of(everyone)) throw ValidationError("eligible set names unknown servers");
  if (r < k_ || r > eligible.size()) {
    throw InvalidRequestDegree("request degree " + std::to_string(r) + " outside [k=" + std::to_string(k_) +
                               ", eligible=" + std::to_string(eligible.size()) + "]");
  }

  const BatchId id = next_id_++;
  BatchRecord& b = batches_.emplace_back();
  b.id = id;
  b.arrival_time = now;
  b.r = r;
  b.unassigned = r;
  b.eligible = eligible;
  ++in_system_;

  for (ServerId s = 0; s < servers() && b.unassigned > 0; ++s) {
    if (servers_[s].mode == ServerMode::kIdle && eligible.contains(s)) assign(s, b, now, out);
  }
  if (b.unassigned > 0) {
    b.buffered = true;
    b.position = buffer_.insert(buffer_.end(), id);
    queued_jobs_ += b.unassigned;
  }
  return id;
}

void CentralizedQueue::complete(ServerId s, double now, const RemovalCost& removal,
                                std::vector<Effect>& out) {
  if (s >= servers() || servers_[s].mode != ServerMode::kBusy) {
    throw CompletionOnNonBusyServer("completion at server " + std::to_string(s) + " which holds no job");
  }
  BatchRecord& b = at(servers_[s].batch);
  b.in_service.erase(s);
  ++b.completed;
  servers_[s] = ServerView{};

  ServerSet freed;
  freed.insert(s);
  if (b.completed == k_) depart(b, now, removal, freed, out);
  for (ServerId f : freed.members()) pull_from_buffer(f, now, out);
  trim();
}

void CentralizedQueue::end_cooldown(ServerId s, double now, std::vector<Effect>& out) {
  if (s >= servers() || servers_[s].mode != ServerMode::kCooldown) {
    throw InvariantViolation("cooldown end at server " + std::to_string(s) + " which is not cooling down");
  }
  servers_[s] = ServerView{};
  pull_from_buffer(s, now, out);
}

void CentralizedQueue::depart(BatchRecord& b, double now, const RemovalCost& removal, ServerSet& freed,
                              std::vector<Effect>& out) {
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
  b.in_service = ServerSet{};
  if (b.buffered) {
    buffer_.erase(b.position);
    b.buffered = false;
    queued_jobs_ -= b.unassigned;
    for (unsigned j = 0; j < b.unassigned; ++j) out.push_back(QueuedJobDropped{kNoServer, b.id});
  }
  b.unassigned = 0;
  b.departed = true;
  --in_system_;
  ++departures_;
}

void CentralizedQueue::assign(ServerId s, BatchRecord& b, double now, std::vector<Effect>& out) {
  if (b.touched.contains(s)) {
    throw InvariantViolation("server " + std::to_string(s) + " would serve batch " + std::to_string(b.id) +
                             " twice");
  }
  --b.unassigned;
  b.touched.insert(s);
  b.in_service.insert(s);
  servers_[s] = ServerView{ServerMode::kBusy, b.id, now, 0};
  out.push_back(JobStarted{s, b.id});
}

void CentralizedQueue::pull_from_buffer(ServerId s, double now, std::vector<Effect>& out) {
  for (BatchId id : buffer_) {
    BatchRecord& b = at(id);
    if (b.touched.contains(s) || !b.eligible.contains(s)) continue;
    if (probe_) probe_(*this, s, id);
    assign(s, b, now, out);
    --queued_jobs_;
    if (b.unassigned == 0) {
      buffer_.erase(b.position);
      b.buffered = false;
    }
    return;
  }
  servers_[s] = ServerView{};
  out.push_back(ServerIdled{s});
}

void CentralizedQueue::trim() {
  while (!batches_.empty() && batches_.front().departed) {
    batches_.pop_front();
    ++base_;
  }
}

std::vector<CentralizedQueue::BufferedBatch> CentralizedQueue::buffer() const {
  std::vector<BufferedBatch> out;
  out.reserve(buffer_.size());
  for (BatchId id : buffer_) {
    const BatchRecord& b = batches_[id - base_];
    out.push_back({id, b.unassigned, b.touched, b.eligible});
  }
  return out;
}

const CentralizedQueue::BatchRecord* CentralizedQueue::find_batch(BatchId id) const {
  if (id < base_ || id >= next_id_) return nullptr;
  const BatchRecord& b = batches_[id - base_];
  return b.departed ? nullptr : &b;
}

void CentralizedQueue::check_invariants() const {
  const auto fail = [](const std::string& what) { throw InvariantViolation(what); };
  if (next_id_ != departures_ + in_system_) fail("conservation: arrivals != departures + in system");

  std::size_t live = 0;
  std::size_t queued = 0;
  for (const BatchRecord& b : batches_) {
    if (b.departed) continue;
    ++live;
    if (b.completed >= k_) fail("batch still present after k completions");
    if (b.touched.size() > b.r) fail("batch touched more than r servers");
    if (b.in_service.size() + b.completed + b.unassigned > b.r) fail("batch holds more than r jobs");
    if (!b.in_service.subset_of(b.touched)) fail("in-service server not recorded as touched");
    if (b.buffered != (b.unassigned > 0)) fail("buffer membership disagrees with unassigned jobs");
    queued += b.unassigned;
    for (ServerId s : b.in_service.members()) {
      if (servers_[s].mode != ServerMode::kBusy || servers_[s].batch != b.id) {
        fail("in-service record disagrees with server state");
      }
    }
  }
  if (live != in_system_) fail("in-system counter drifted");
  if (queued != queued_jobs_) fail("queued-job counter drifted");

  double last_arrival = -1;
  for (BatchId id : buffer_) {
    const BatchRecord& b = batches_[id - base_];
    if (b.arrival_time < last_arrival) fail("buffer not in arrival order");
    last_arrival = b.arrival_time;
  }

  // Greedy FCFS: an idle server never coexists with a buffered job it could serve.
  for (ServerId s = 0; s < servers(); ++s) {
    if (servers_[s].mode != ServerMode::kIdle) continue;
    for (BatchId id : buffer_) {
      const BatchRecord& b = batches_[id - base_];
      if (!b.touched.contains(s) && b.eligible.contains(s)) fail("idle server ignores an eligible buffered job");
    }
  }
}

}  // namespace redq
