#pragma once

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "duel/config.hpp"
#include "duel/server/protocol.hpp"
#include "duel/sim.hpp"

namespace duel::server {

/// Outgoing messages for one client. Bounded; when full the oldest
/// message is dropped. Safe to use from any thread.
class Outbox {
 public:
  static constexpr std::size_t kCapacity = 16;

  void Push(std::string message);
  std::optional<std::string> Pop();
  std::vector<std::string> Drain();
  std::size_t size() const;
  std::size_t dropped() const;

  /// Called (outside the lock) after every push.
  void SetNotify(std::function<void()> notify);

  /// Request that the transport close this client.
  void Close();
  bool closed() const;

 private:
  mutable std::mutex mu_;
  std::deque<std::string> queue_;
  std::size_t dropped_ = 0;
  bool closed_ = false;
  std::function<void()> notify_;
};

using ClientId = std::uint64_t;

struct SessionOptions {
  std::string id = "default";
  AppConfig config;
  /// Directory for the finished EpisodeRecord; empty skips persistence.
  std::filesystem::path log_dir;
  /// Malformed messages tolerated before the client is dropped.
  int max_protocol_errors = 3;
};

/// One live duel against a remote driver. Connection handlers only enqueue
/// events (Connect / Receive / Disconnect); all state changes happen in
/// Tick, called by the session's sim loop with a monotonic time in seconds.
class Session {
 public:
  explicit Session(SessionOptions options);

  const std::string& id() const { return options_.id; }

  // Thread-safe event intake.
  void Connect(ClientId client, std::shared_ptr<Outbox> outbox, double now);
  void Receive(ClientId client, std::string text, double now);
  void Disconnect(ClientId client, double now);

  /// Processes queued events, advances the phase and, when running, the
  /// episode by one sample.
  void Tick(double now);

  Phase phase() const { return phase_; }
  // Accessors for the sim-loop thread (not synchronized with Tick).
  const Episode* episode() const { return episode_.get(); }
  std::optional<EpisodeRecord> result() const { return result_; }
  std::optional<std::filesystem::path> log_path() const { return log_path_; }
  int protocol_errors() const { return protocol_errors_; }
  std::size_t client_count() const { return clients_.size(); }
  std::optional<ClientId> driver() const { return driver_; }
  /// The input the next tick will apply, including clamping and decay.
  ControlInput held_input() const { return held_; }

  /// Thread-safe: no clients left and the episode is over or never began.
  bool Idle() const;

 private:
  struct Event {
    enum class Kind { kConnect, kReceive, kDisconnect } kind;
    ClientId client = 0;
    std::string text;
    std::shared_ptr<Outbox> outbox;
    double time = 0.0;
  };
  struct Client {
    std::shared_ptr<Outbox> outbox;
    std::optional<Role> role;
    int errors = 0;
  };

  void Handle(const Event& e);
  void HandleMessage(ClientId id, Client& c, const ClientMessage& msg, double now);
  void Reject(ClientId id, Client& c, const std::string& code,
              const std::string& detail);
  void Start(double now);
  void StepEpisode(double now);
  void Finish();
  void Broadcast(const std::string& message);
  std::string StateMessage(double now) const;
  std::string ResultMessage() const;

  SessionOptions options_;
  mutable std::mutex events_mu_;
  std::vector<Event> events_;
  bool idle_flag_ = true;

  std::map<ClientId, Client> clients_;
  std::optional<ClientId> driver_;
  std::atomic<Phase> phase_ = Phase::kLobby;
  double countdown_end_ = 0.0;
  std::unique_ptr<Episode> episode_;

  ControlInput held_;
  double last_input_time_ = 0.0;
  bool stale_ = false;
  int stale_ticks_ = 0;

  std::optional<EpisodeRecord> result_;
  std::optional<std::filesystem::path> log_path_;
  int protocol_errors_ = 0;
};

/// Owns sessions and one sim-loop thread per session. Ticks run every
/// `tick_period` seconds of wall clock.
class SessionHub {
 public:
  explicit SessionHub(AppConfig config, std::filesystem::path log_dir = {},
                      std::size_t max_sessions = 64);
  ~SessionHub();
  SessionHub(const SessionHub&) = delete;
  SessionHub& operator=(const SessionHub&) = delete;

  /// Routes a new connection. The first message must be a join; it picks
  /// (or creates) the session. Returns the client's id.
  ClientId Open(std::shared_ptr<Outbox> outbox);
  void Receive(ClientId client, std::string text);
  void Close(ClientId client);

  std::size_t session_count() const;
  void Stop();

 private:
  struct Runner {
    std::shared_ptr<Session> session;
    std::jthread thread;
  };
  struct Pending {
    std::shared_ptr<Outbox> outbox;
    int errors = 0;
  };

  std::shared_ptr<Session> FindOrCreate(const std::string& id);
  void Reap();
  double Now() const;

  AppConfig config_;
  std::filesystem::path log_dir_;
  std::size_t max_sessions_;
  std::chrono::steady_clock::time_point epoch_;

  mutable std::mutex mu_;
  std::map<std::string, Runner> runners_;
  std::map<ClientId, Pending> pending_;
  std::map<ClientId, std::shared_ptr<Session>> routes_;
  ClientId next_id_ = 1;
};

}  // namespace duel::server
