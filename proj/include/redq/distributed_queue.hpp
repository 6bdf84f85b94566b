#pragma once

#include <deque>
#include <string_view>
#include <vector>

#include "redq/model.hpp"
#include "redq/rng.hpp"

namespace redq {

enum class DispatchPolicy { kLeastLoaded, kUniformRandom, kRoundRobin };

std::string_view to_string(DispatchPolicy policy);
DispatchPolicy parse_dispatch_policy(std::string_view text);

/// Picks r distinct servers out of `eligible`.
///   least-loaded: ascending (load, server id)
///   uniform-random: uniform r-subset drawn from `rng`
///   round-robin: next eligible ids after `cursor`, cyclically; advances it
ServerSet choose_servers(DispatchPolicy policy, const std::vector<unsigned>& loads, ServerSet eligible,
                         unsigned r, Rng& rng, ServerId& cursor);

/// Redundant-request queue where every server owns a FIFO buffer and the r
/// target servers of a batch are fixed at arrival time.
///
/// A freed server only looks at the head of its own buffer, so an idle server
/// may coexist with jobs waiting elsewhere. On departure, queued siblings are
/// deleted from their buffers at no cost and in-service siblings are removed
/// with a removal-cost draw, exactly as in the centralized model.
class DistributedQueue {
 public:
  struct BatchRecord {
    BatchId id = 0;
    double arrival_time = 0;
    unsigned r = 0;
    unsigned completed = 0;
    ServerSet in_service;
    ServerSet queued;
    ServerSet touched;
    bool departed = false;
  };

  DistributedQueue(unsigned n, unsigned k, DispatchPolicy policy = DispatchPolicy::kLeastLoaded,
                   std::uint64_t dispatch_seed = 0);

  /// Dispatches via the configured policy. Throws InvalidRequestDegree.
  BatchId arrive(double now, unsigned r, ServerSet eligible, std::vector<Effect>& out);

  /// Dispatches to an explicit target set (r = |targets|).
  BatchId arrive_to(double now, ServerSet targets, std::vector<Effect>& out);

  void complete(ServerId s, double now, const RemovalCost& removal, std::vector<Effect>& out);
  void end_cooldown(ServerId s, double now, std::vector<Effect>& out);

  unsigned servers() const { return static_cast<unsigned>(servers_.size()); }
  unsigned k() const { return k_; }
  const ServerView& server(ServerId s) const { return servers_.at(s); }
  const std::deque<BatchId>& buffer_of(ServerId s) const { return buffers_.at(s); }
  /// Jobs in the server's buffer plus the one in service, if any.
  unsigned load(ServerId s) const;
  std::size_t queued_jobs() const { return queued_jobs_; }
  std::size_t in_system() const { return in_system_; }
  std::uint64_t arrivals() const { return next_id_; }
  std::uint64_t departures() const { return departures_; }
  const BatchRecord* find_batch(BatchId id) const;

  void check_invariants() const;

 private:
  BatchRecord& at(BatchId id) { return batches_[id - base_]; }
  void assign(ServerId s, BatchRecord& b, double now, std::vector<Effect>& out);
  void pull_own_head(ServerId s, double now, std::vector<Effect>& out);
  void trim();

  unsigned k_;
  DispatchPolicy policy_;
  Rng dispatch_rng_;
  ServerId cursor_ = 0;
  std::vector<ServerView> servers_;
  std::vector<std::deque<BatchId>> buffers_;
  std::deque<BatchRecord> batches_;
  BatchId base_ = 0;
  BatchId next_id_ = 0;
  std::size_t queued_jobs_ = 0;
  std::size_t in_system_ = 0;
  std::uint64_t departures_ = 0;
};

}  // namespace redq
