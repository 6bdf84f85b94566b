#pragma once

#include <deque>
#include <functional>
#include <list>
#include <vector>

#include "redq/model.hpp"

namespace redq {

/// Redundant-request queue with one common FIFO buffer.
///
/// Each arriving batch is split into r jobs that must run on r distinct
/// servers; the batch departs at its k-th job completion, at which point its
/// queued jobs vanish and its in-service jobs are removed (the server may then
/// spend a removal-cost cooldown before it is free again). A free server takes
/// one job from the earliest buffered batch it has not already served.
///
/// The model has no clock of its own: callers pass `now` and translate the
/// emitted effects into timed events. Tie-breaks: idle servers are filled in
/// ascending id order on arrival, and servers freed by the same event scan
/// the buffer in ascending id order.
class CentralizedQueue {
 public:
  struct BatchRecord {
    BatchId id = 0;
    double arrival_time = 0;
    unsigned r = 0;
    unsigned completed = 0;
    unsigned unassigned = 0;
    ServerSet in_service;
    ServerSet touched;
    ServerSet eligible;
    bool departed = false;
    bool buffered = false;
    std::list<BatchId>::iterator position;
  };

  struct BufferedBatch {
    BatchId batch;
    unsigned unassigned;
    ServerSet touched;
    ServerSet eligible;
  };

  /// Called right before a server takes a job from the buffer (test hook).
  using AssignmentProbe = std::function<void(const CentralizedQueue&, ServerId, BatchId)>;

  CentralizedQueue(unsigned n, unsigned k);

  /// Admits a new batch of r jobs restricted to `eligible` (empty = all).
  /// Throws InvalidRequestDegree unless k <= r <= |eligible|.
  BatchId arrive(double now, unsigned r, ServerSet eligible, std::vector<Effect>& out);

  /// Handles a job completion at server s. Throws CompletionOnNonBusyServer.
  void complete(ServerId s, double now, const RemovalCost& removal, std::vector<Effect>& out);

  /// Server s leaves its removal-cost cooldown and scans the buffer.
  void end_cooldown(ServerId s, double now, std::vector<Effect>& out);

  unsigned servers() const { return static_cast<unsigned>(servers_.size()); }
  unsigned k() const { return k_; }
  const ServerView& server(ServerId s) const { return servers_.at(s); }
  std::vector<BufferedBatch> buffer() const;
  std::size_t buffered_batches() const { return buffer_.size(); }
  std::size_t queued_jobs() const { return queued_jobs_; }
  std::size_t in_system() const { return in_system_; }
  std::uint64_t arrivals() const { return next_id_; }
  std::uint64_t departures() const { return departures_; }
  /// nullptr once the batch has departed and been discarded.
  const BatchRecord* find_batch(BatchId id) const;

  void set_assignment_probe(AssignmentProbe probe) { probe_ = std::move(probe); }

  /// Throws InvariantViolation if the structural invariants do not hold.
  void check_invariants() const;

 private:
  BatchRecord& at(BatchId id) { return batches_[id - base_]; }
  void assign(ServerId s, BatchRecord& b, double now, std::vector<Effect>& out);
  void pull_from_buffer(ServerId s, double now, std::vector<Effect>& out);
  void depart(BatchRecord& b, double now, const RemovalCost& removal, ServerSet& freed,
              std::vector<Effect>& out);
  void trim();

  unsigned k_;
  std::vector<ServerView> servers_;
  std::deque<BatchRecord> batches_;
  BatchId base_ = 0;
  BatchId next_id_ = 0;
  std::list<BatchId> buffer_;
  std::size_t queued_jobs_ = 0;
  std::size_t in_system_ = 0;
  std::uint64_t departures_ = 0;
  AssignmentProbe probe_;
};

}  // namespace redq
