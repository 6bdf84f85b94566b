#include "redq/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <thread>

#include "redq/centralized_queue.hpp"
#include "redq/detail/text.hpp"
#include "redq/distributed_queue.hpp"
#include "redq/rng.hpp"
#include "redq/sim_core.hpp"
#include "redq/workload.hpp"

namespace redq {

double RunResult::throughput() const {
  const double span = end_time - measure_start;
  return span > 0 ? static_cast<double>(measured) / span : 0.0;
}

double RunResult::time_average_occupancy() const {
  double total = 0;
  double weighted = 0;
  for (std::size_t x = 0; x < occupancy_time.size(); ++x) {
    total += occupancy_time[x];
    weighted += static_cast<double>(x) * occupancy_time[x];
  }
  return total > 0 ? weighted / total : 0.0;
}

namespace {

struct ArrivalEvent {};
struct CompletionEvent {
  ServerId server;
};
struct CooldownEndEvent {
  ServerId server;
};
using SimEvent = std::variant<ArrivalEvent, CompletionEvent, CooldownEndEvent>;

class TraceWriter {
 public:
  TraceWriter(std::ostream* out, bool distributed) : out_(out), distributed_(distributed) {
    if (!out_) return;
    *out_ << "event_seq,time,kind,server_id,batch_id,buffer_len,in_system";
    if (distributed_) *out_ << ",buffer_of_server";
    *out_ << '\n';
  }

  template <class Model>
  void row(const Model& model, std::uint64_t seq, double time, std::string_view kind, ServerId server,
           std::optional<BatchId> batch) {
    if (!out_) return;
    auto& o = *out_;
    o << seq << ',' << detail::format_number(time) << ',' << kind << ',';
    if (server != kNoServer) o << server;
    o << ',';
    if (batch) o << *batch;
    o << ',' << model.queued_jobs() << ',' << model.in_system();
    if (distributed_) {
      o << ',';
      if constexpr (std::is_same_v<Model, DistributedQueue>) {
        if (server != kNoServer) o << model.buffer_of(server).size();
      }
    }
    o << '\n';
  }

 private:
  std::ostream* out_;
  bool distributed_;
};

template <class Model>
class Driver {
 public:
  Driver(const SystemConfig& config, std::uint64_t replication, const RunOptions& options, Model model)
      : config_(config),
        options_(options),
        model_(std::move(model)),
        arrivals_(config.arrivals, make_stream(config.seed, replication, Stream::kArrivals)),
        removal_rng_(make_stream(config.seed, replication, Stream::kRemoval)),
        eligibility_rng_(make_stream(config.seed, replication, Stream::kEligibility)),
        completion_(config.n),
        trace_(options.trace, config.buffer_mode == BufferMode::kDistributed) {
    service_rng_.reserve(config.n);
    for (unsigned s = 0; s < config.n; ++s) {
      service_rng_.push_back(make_stream(config.seed, replication, Stream::kService, s));
    }
    if (!config.removal.is_zero()) {
      removal_ = [this](ServerId) { return sample(config_.removal, removal_rng_); };
    }
  }

  RunResult run() {
    const auto* saturated = std::get_if<SaturatedRegime>(&config_.regime);
    const auto* batch_horizon = std::get_if<BatchHorizon>(&config_.horizon);
    const auto* time_horizon = std::get_if<TimeHorizon>(&config_.horizon);

    std::uint64_t stop_after = 0;  // departures; 0 = no departure-based stop
    if (saturated) {
      stop_after = saturated_measured_departures(saturated->backlog);
      warmup_departures_ = 0;
      measuring_ = true;
      for (std::uint64_t i = 0; i < saturated->backlog; ++i) queue_.schedule(0.0, ArrivalEvent{});
    } else {
      if (batch_horizon) {
        stop_after = batch_horizon->batches;
        warmup_departures_ = batch_horizon->batches / 10;
        measuring_ = warmup_departures_ == 0;
      } else {
        warmup_time_ = 0.1 * time_horizon->time;
      }
      schedule_next_arrival();
    }

    std::vector<Effect> effects;
    double last_time = 0;
    bool stopped = false;
    while (auto ev = queue_.next_event()) {
      if (time_horizon && !saturated && ev->time > time_horizon->time) break;
      accumulate(last_time, ev->time);
      last_time = ev->time;
      const double now = ev->time;
      effects.clear();

      std::string_view kind;
      ServerId event_server = kNoServer;
      std::optional<BatchId> event_batch;
      if (std::holds_alternative<ArrivalEvent>(ev->payload)) {
        kind = "arrival";
        const std::uint64_t index = model_.arrivals();
        const unsigned r =
            request_degree(config_.request_degree, index, config_.k, config_.eligible_count());
        ServerSet eligible = ServerSet::all(config_.n);
        if (config_.m && *config_.m < config_.n) {
          eligible = sample_eligible_set(*config_.m, config_.n, eligibility_rng_);
        }
        event_batch = model_.arrive(now, r, eligible, effects);
        ++result_.arrivals;
        if (!saturated) schedule_next_arrival();
      } else if (const auto* c = std::get_if<CompletionEvent>(&ev->payload)) {
        kind = "completion";
        event_server = c->server;
        event_batch = model_.server(c->server).batch;
        model_.complete(c->server, now, removal_, effects);
      } else {
        kind = "cooldown_end";
        event_server = std::get<CooldownEndEvent>(ev->payload).server;
        model_.end_cooldown(event_server, now, effects);
      }
      trace_.row(model_, ev->seq, now, kind, event_server, event_batch);

      for (const Effect& e : effects) {
        apply(e, now, ev->seq);
        if (options_.on_effect) options_.on_effect(now, e);
      }
      level_ = model_.in_system();
      if (options_.check_invariants) model_.check_invariants();
      ++result_.events;

      if (!measuring_ && !saturated && batch_horizon && result_.all_departures >= warmup_departures_) {
        measuring_ = true;
        result_.measure_start = now;
      }
      if (stop_after != 0 && result_.all_departures >= stop_after) {
        stopped = true;
        break;
      }
      if (options_.max_events && result_.events >= *options_.max_events) {
        stopped = true;
        break;
      }
    }

    if (time_horizon && !saturated && !stopped) {
      accumulate(last_time, time_horizon->time);
      last_time = time_horizon->time;
      result_.measure_start = warmup_time_;
    }
    result_.end_time = last_time;
    if (result_.end_time < result_.measure_start) result_.end_time = result_.measure_start;
    return std::move(result_);
  }

 private:
  void schedule_next_arrival() {
    const auto next = arrivals_.next_arrival();
    if (!next) return;
    if (const auto* t = std::get_if<TimeHorizon>(&config_.horizon); t && *next > t->time) return;
    queue_.schedule(*next, ArrivalEvent{});
  }

  bool in_window(double t) const {
    if (std::holds_alternative<TimeHorizon>(config_.horizon) &&
        !std::holds_alternative<SaturatedRegime>(config_.regime)) {
      return t >= warmup_time_;
    }
    return measuring_;
  }

  void accumulate(double from, double to) {
    if (to <= from) return;
    if (std::holds_alternative<TimeHorizon>(config_.horizon) &&
        !std::holds_alternative<SaturatedRegime>(config_.regime)) {
      from = std::max(from, warmup_time_);
      if (to <= from) return;
    } else if (!measuring_) {
      return;
    }
    const std::size_t level = level_;
    if (result_.occupancy_time.size() <= level) result_.occupancy_time.resize(level + 1, 0.0);
    result_.occupancy_time[level] += to - from;
  }

  void apply(const Effect& e, double now, std::uint64_t seq) {
    std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          if constexpr (std::is_same_v<T, JobStarted>) {
            const double d = sample(config_.service, service_rng_[x.server]);
            completion_[x.server] = queue_.schedule(now + d, CompletionEvent{x.server});
            trace_.row(model_, seq, now, "start", x.server, x.batch);
          } else if constexpr (std::is_same_v<T, JobRemoved>) {
            queue_.cancel(completion_[x.server]);
            trace_.row(model_, seq, now, "removal", x.server, x.batch);
          } else if constexpr (std::is_same_v<T, QueuedJobDropped>) {
            trace_.row(model_, seq, now, "drop", x.server, x.batch);
          } else if constexpr (std::is_same_v<T, CooldownStarted>) {
            queue_.schedule(x.until, CooldownEndEvent{x.server});
            trace_.row(model_, seq, now, "cooldown", x.server, std::nullopt);
          } else if constexpr (std::is_same_v<T, ServerIdled>) {
            trace_.row(model_, seq, now, "idle", x.server, std::nullopt);
          } else if constexpr (std::is_same_v<T, BatchDeparted>) {
            const double latency = x.departure_time - x.arrival_time;
            ++result_.departures;
            ++result_.all_departures;
            result_.all_latency_sum += latency;
            if (in_window(now) && result_.all_departures > warmup_departures_) {
              ++result_.measured;
              result_.latency_sum += latency;
              result_.latency_sum_sq += latency * latency;
              if (options_.keep_latencies) result_.latencies.push_back(latency);
            }
            trace_.row(model_, seq, now, "departure", kNoServer, x.batch);
          }
        },
        e);
  }

  const SystemConfig& config_;
  const RunOptions& options_;
  Model model_;
  EventQueue<SimEvent> queue_;
  ArrivalGenerator arrivals_;
  std::vector<Rng> service_rng_;
  Rng removal_rng_;
  Rng eligibility_rng_;
  RemovalCost removal_;
  std::vector<EventHandle> completion_;
  TraceWriter trace_;
  RunResult result_;
  std::size_t level_ = 0;
  std::uint64_t warmup_departures_ = 0;
  double warmup_time_ = 0;
  bool measuring_ = false;
};

}  // namespace

RunResult simulate(const SystemConfig& config, std::uint64_t replication, const RunOptions& options) {
  validate(config);
  if (config.buffer_mode == BufferMode::kCentral) {
    Driver<CentralizedQueue> driver(config, replication, options, CentralizedQueue(config.n, config.k));
    return driver.run();
  }
  DistributedQueue model(config.n, config.k, config.dispatch,
                         derive_seed(config.seed, replication, Stream::kDispatch));
  Driver<DistributedQueue> driver(config, replication, options, std::move(model));
  return driver.run();
}

std::vector<RunResult> simulate_replications(const SystemConfig& config, unsigned threads) {
  validate(config);
  const unsigned reps = config.replications;
  std::vector<RunResult> results(reps);
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = std::min(threads, reps);
  if (threads <= 1) {
    for (unsigned i = 0; i < reps; ++i) results[i] = simulate(config, i);
    return results;
  }
  std::atomic<unsigned> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) {
      pool.emplace_back([&] {
        for (unsigned i = next++; i < reps; i = next++) {
          try {
            results[i] = simulate(config, i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
  }
  if (failure) std::rethrow_exception(failure);
  return results;
}

}  // namespace redq
