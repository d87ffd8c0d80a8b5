#include "duel/server/session.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "duel/episode_log.hpp"
#include "json.hpp"

namespace duel::server {

using nlohmann::json;

std::string ToString(Role r) {
  return r == Role::kDriver ? "driver" : "spectator";
}

std::string ToString(Phase p) {
  switch (p) {
    case Phase::kLobby: return "lobby";
    case Phase::kCountdown: return "countdown";
    case Phase::kRunning: return "running";
    case Phase::kFinished: return "finished";
  }
  return "unknown";
}

namespace {

double FiniteField(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw ProtocolError("bad_message", std::string("missing field '") + key + "'");
  if (!it->is_number()) throw ProtocolError("bad_message", std::string("field '") + key + "' must be a number");
  const double v = it->get<double>();
  if (!std::isfinite(v)) throw ProtocolError("bad_message", std::string("field '") + key + "' must be finite");
  return v;
}

// Fixed precision keeps state messages small; 1 um is far below a pixel.
double Round(double v) { return std::round(v * 1e6) / 1e6; }

json RobotJson(const KinodynamicState& s) {
  return {{"x", Round(s.x)}, {"y", Round(s.y)}, {"theta", Round(s.theta)},
          {"v", Round(s.Speed())}};
}

json PolylineJson(const Trajectory& traj) {
  json out = json::array();
  for (const auto& p : traj.samples) out.push_back({Round(p.x), Round(p.y)});
  return out;
}

}  // namespace

ClientMessage ParseClientMessage(const std::string& text) {
  if (text.size() > kMaxMessageBytes)
    throw ProtocolError("too_large", "message exceeds " + std::to_string(kMaxMessageBytes) + " bytes");
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ProtocolError("bad_message", "message is not a JSON object");
  auto version = j.find("protocol");
  if (version == j.end() || !version->is_number_integer() ||
      version->get<int>() != kProtocolVersion)
    throw ProtocolError("bad_version", "expected \"protocol\": " + std::to_string(kProtocolVersion));
  auto type = j.find("type");
  if (type == j.end() || !type->is_string())
    throw ProtocolError("bad_message", "missing string field 'type'");
  const std::string t = type->get<std::string>();
  if (t == "join") {
    JoinMsg m;
    auto role = j.find("role");
    if (role == j.end() || !role->is_string())
      throw ProtocolError("bad_message", "join needs a role");
    if (*role == "driver") m.role = Role::kDriver;
    else if (*role == "spectator") m.role = Role::kSpectator;
    else throw ProtocolError("bad_message", "unknown role '" + role->get<std::string>() + "'");
    if (auto s = j.find("session"); s != j.end() && !s->is_null()) {
      static const std::regex kId("[A-Za-z0-9_-]{1,64}");
      if (!s->is_string() || !std::regex_match(s->get<std::string>(), kId))
        throw ProtocolError("bad_message", "session id must match [A-Za-z0-9_-]{1,64}");
      m.session = s->get<std::string>();
    }
    return m;
  }
  if (t == "ready") return ReadyMsg{};
  if (t == "input") {
    InputMsg m;
    m.v = FiniteField(j, "v");
    m.omega = FiniteField(j, "omega");
    m.client_time = FiniteField(j, "client_time");
    return m;
  }
  throw ProtocolError("bad_message", "unknown message type '" + t + "'");
}

std::string ErrorMessage(const std::string& code, const std::string& detail) {
  return json{{"protocol", kProtocolVersion}, {"type", "error"}, {"code", code}, {"detail", detail}}.dump();
}

// ---------------------------------------------------------------------------

void Outbox::Push(std::string message) {
  std::function<void()> notify;
  {
    std::lock_guard lock(mu_);
    if (closed_) return;
    if (queue_.size() >= kCapacity) {
      queue_.pop_front();
      ++dropped_;
    }
    queue_.push_back(std::move(message));
    notify = notify_;
  }
  if (notify) notify();
}

std::optional<std::string> Outbox::Pop() {
  std::lock_guard lock(mu_);
  if (queue_.empty()) return std::nullopt;
  std::string m = std::move(queue_.front());
  queue_.pop_front();
  return m;
}

std::vector<std::string> Outbox::Drain() {
  std::lock_guard lock(mu_);
  std::vector<std::string> out(std::make_move_iterator(queue_.begin()),
                               std::make_move_iterator(queue_.end()));
  queue_.clear();
  return out;
}

std::size_t Outbox::size() const {
  std::lock_guard lock(mu_);
  return queue_.size();
}

std::size_t Outbox::dropped() const {
  std::lock_guard lock(mu_);
  return dropped_;
}

void Outbox::SetNotify(std::function<void()> notify) {
  std::lock_guard lock(mu_);
  notify_ = std::move(notify);
}

void Outbox::Close() {
  std::function<void()> notify;
  {
    std::lock_guard lock(mu_);
    closed_ = true;
    notify = notify_;
  }
  if (notify) notify();
}

bool Outbox::closed() const {
  std::lock_guard lock(mu_);
  return closed_;
}

// ---------------------------------------------------------------------------

Session::Session(SessionOptions options) : options_(std::move(options)) {
  options_.config.sim.Validate();
  ParseController(options_.config.run.controller);
  if (options_.config.server.stale_after <= 0.0)
    throw std::invalid_argument("server.stale_after must be positive");
}

void Session::Connect(ClientId client, std::shared_ptr<Outbox> outbox, double now) {
  std::lock_guard lock(events_mu_);
  events_.push_back({Event::Kind::kConnect, client, {}, std::move(outbox), now});
  idle_flag_ = false;
}

void Session::Receive(ClientId client, std::string text, double now) {
  std::lock_guard lock(events_mu_);
  events_.push_back({Event::Kind::kReceive, client, std::move(text), nullptr, now});
}

void Session::Disconnect(ClientId client, double now) {
  std::lock_guard lock(events_mu_);
  events_.push_back({Event::Kind::kDisconnect, client, {}, nullptr, now});
}

bool Session::Idle() const {
  std::lock_guard lock(events_mu_);
  return idle_flag_ && events_.empty();
}

void Session::Tick(double now) {
  std::vector<Event> events;
  {
    std::lock_guard lock(events_mu_);
    events.swap(events_);
  }
  for (const auto& e : events) Handle(e);

  if (phase_ == Phase::kCountdown) {
    if (!driver_) {
      phase_ = Phase::kLobby;
      episode_.reset();
      Broadcast(StateMessage(now));
    } else if (now >= countdown_end_) {
      Start(now);
    } else {
      Broadcast(StateMessage(now));
    }
  }
  if (phase_ == Phase::kRunning) StepEpisode(now);

  std::lock_guard lock(events_mu_);
  idle_flag_ = clients_.empty() &&
               (phase_ == Phase::kLobby || phase_ == Phase::kFinished);
}

void Session::Handle(const Event& e) {
  switch (e.kind) {
    case Event::Kind::kConnect:
      clients_[e.client] = Client{e.outbox, std::nullopt, 0};
      return;
    case Event::Kind::kDisconnect:
      clients_.erase(e.client);
      if (driver_ == e.client) driver_.reset();
      return;
    case Event::Kind::kReceive: {
      auto it = clients_.find(e.client);
      if (it == clients_.end()) return;
      try {
        HandleMessage(e.client, it->second, ParseClientMessage(e.text), e.time);
      } catch (const ProtocolError& err) {
        Reject(e.client, it->second, err.code(), err.what());
      }
      return;
    }
  }
}

void Session::Reject(ClientId id, Client& c, const std::string& code,
                     const std::string& detail) {
  ++protocol_errors_;
  c.outbox->Push(ErrorMessage(code, detail));
  if (code == "role" || code == "bad_phase") return;  // valid but not allowed
  if (++c.errors >= options_.max_protocol_errors || code == "too_large") {
    c.outbox->Close();
    clients_.erase(id);
    if (driver_ == id) driver_.reset();
  }
}

void Session::HandleMessage(ClientId id, Client& c, const ClientMessage& msg,
                            double now) {
  if (const auto* join = std::get_if<JoinMsg>(&msg)) {
    if (c.role) throw ProtocolError("bad_message", "already joined");
    c.role = (join->role == Role::kDriver && !driver_) ? Role::kDriver : Role::kSpectator;
    if (c.role == Role::kDriver) driver_ = id;
    c.outbox->Push(json{{"protocol", kProtocolVersion}, {"type", "welcome"},
                        {"session", options_.id}, {"role", ToString(*c.role)},
                        {"client", id}}
                       .dump());
    c.outbox->Push(StateMessage(now));
    if (phase_ == Phase::kFinished) c.outbox->Push(ResultMessage());
    return;
  }
  if (!c.role) throw ProtocolError("bad_message", "join first");
  if (std::holds_alternative<ReadyMsg>(msg)) {
    if (driver_ != id) throw ProtocolError("role", "only the driver can start the race");
    if (phase_ != Phase::kLobby) throw ProtocolError("bad_phase", "race already started");
    phase_ = Phase::kCountdown;
    countdown_end_ = now + options_.config.server.countdown;
    episode_ = std::make_unique<Episode>(options_.config.sim,
                                         ParseController(options_.config.run.controller),
                                         External{}, options_.config.run.seed);
    held_ = {options_.config.sim.opponent_initial_speed, 0.0};
    return;
  }
  const auto& input = std::get<InputMsg>(msg);
  if (driver_ != id) throw ProtocolError("role", "spectators cannot send input");
  if (phase_ != Phase::kCountdown && phase_ != Phase::kRunning)
    throw ProtocolError("bad_phase", "input outside a race");
  held_ = ClampInput({input.v, input.omega}, options_.config.sim.opponent_limits);
  last_input_time_ = now;
  stale_ = false;
}

void Session::Start(double now) {
  phase_ = Phase::kRunning;
  // The countdown counts as fresh input so the start is not already stale.
  last_input_time_ = std::max(last_input_time_, now);
  stale_ = false;
}

void Session::StepEpisode(double now) {
  if (now - last_input_time_ > options_.config.server.stale_after) {
    if (!stale_) {
      stale_ = true;
      stale_ticks_ = 0;
    }
    // Halve once per decision cycle of silence, starting immediately.
    if (stale_ticks_ % options_.config.sim.CycleSteps() == 0) held_.v *= 0.5;
    held_.omega = 0.0;
    ++stale_ticks_;
  }
  episode_->Advance(held_);
  Broadcast(StateMessage(now));
  if (episode_->finished()) Finish();
}

void Session::Finish() {
  phase_ = Phase::kFinished;
  result_ = episode_->record();
  if (!options_.log_dir.empty()) {
    std::filesystem::create_directories(options_.log_dir);
    log_path_ = options_.log_dir / ("session_" + options_.id + "_seed" +
                                    std::to_string(result_->seed) + ".jsonl");
    WriteEpisodeLog(*log_path_, *result_);
  }
  Broadcast(ResultMessage());
}

void Session::Broadcast(const std::string& message) {
  for (auto& [id, c] : clients_) c.outbox->Push(message);
}

std::string Session::StateMessage(double now) const {
  json j{{"protocol", kProtocolVersion}, {"type", "state"}, {"session", options_.id},
         {"phase", ToString(phase_)}};
  j["countdown"] = phase_ == Phase::kCountdown ? std::max(0.0, countdown_end_ - now) : 0.0;
  if (episode_) {
    j["t"] = Round(episode_->time());
    j["step"] = episode_->step();
    j["ego"] = RobotJson(episode_->ego());
    j["opponent"] = RobotJson(episode_->opponent());
    const auto& b = episode_->beliefs();
    j["beliefs"] = {b.beliefs[0], b.beliefs[1], b.beliefs[2]};
    j["potential"] = b.potential;
  } else {
    j["t"] = 0.0;
    j["step"] = 0;
    j["ego"] = nullptr;
    j["opponent"] = nullptr;
    j["beliefs"] = {1.0 / 3, 1.0 / 3, 1.0 / 3};
    j["potential"] = 0.0;
  }
  json plans{{"best", json::array()}, {"failsafe", json::array()}, {"mixed", json::array()}};
  if (const CycleRecord* cycle = episode_ ? episode_->last_cycle() : nullptr) {
    plans["best"] = PolylineJson(cycle->best);
    plans["failsafe"] = PolylineJson(cycle->failsafe);
    plans["mixed"] = PolylineJson(cycle->mixed);
  }
  j["plans"] = std::move(plans);
  return j.dump();
}

std::string Session::ResultMessage() const {
  return json{{"protocol", kProtocolVersion}, {"type", "result"},
              {"outcome", ToString(result_->outcome)},
              {"collision", result_->collision},
              {"t", Round(result_->end_time)}}
      .dump();
}

// ---------------------------------------------------------------------------

SessionHub::SessionHub(AppConfig config, std::filesystem::path log_dir,
                       std::size_t max_sessions)
    : config_(std::move(config)),
      log_dir_(std::move(log_dir)),
      max_sessions_(max_sessions),
      epoch_(std::chrono::steady_clock::now()) {}

SessionHub::~SessionHub() { Stop(); }

double SessionHub::Now() const {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - epoch_).count();
}

ClientId SessionHub::Open(std::shared_ptr<Outbox> outbox) {
  std::lock_guard lock(mu_);
  Reap();
  const ClientId id = next_id_++;
  pending_[id] = Pending{std::move(outbox), 0};
  return id;
}

void SessionHub::Receive(ClientId client, std::string text) {
  std::lock_guard lock(mu_);
  if (auto r = routes_.find(client); r != routes_.end()) {
    r->second->Receive(client, std::move(text), Now());
    return;
  }
  auto p = pending_.find(client);
  if (p == pending_.end()) return;
  auto reject = [&](const std::string& code, const std::string& detail) {
    p->second.outbox->Push(ErrorMessage(code, detail));
    if (++p->second.errors >= 3 || code == "too_large" || code == "session_limit") {
      p->second.outbox->Close();
      pending_.erase(p);
    }
  };
  try {
    const ClientMessage msg = ParseClientMessage(text);
    const auto* join = std::get_if<JoinMsg>(&msg);
    if (!join) return reject("bad_message", "join first");
    auto session = FindOrCreate(join->session.value_or("default"));
    if (!session) return reject("session_limit", "too many sessions");
    const double now = Now();
    session->Connect(client, p->second.outbox, now);
    session->Receive(client, std::move(text), now);
    routes_[client] = session;
    pending_.erase(p);
  } catch (const ProtocolError& err) {
    reject(err.code(), err.what());
  }
}

void SessionHub::Close(ClientId client) {
  std::lock_guard lock(mu_);
  pending_.erase(client);
  if (auto r = routes_.find(client); r != routes_.end()) {
    r->second->Disconnect(client, Now());
    routes_.erase(r);
  }
}

std::shared_ptr<Session> SessionHub::FindOrCreate(const std::string& id) {
  if (auto it = runners_.find(id); it != runners_.end()) {
    if (it->second.session->phase() != Phase::kFinished || !it->second.session->Idle())
      return it->second.session;
    runners_.erase(it);  // finished and abandoned: start over
  }
  if (runners_.size() >= max_sessions_) return nullptr;
  SessionOptions opts;
  opts.id = id;
  opts.config = config_;
  opts.log_dir = log_dir_;
  auto session = std::make_shared<Session>(std::move(opts));
  const double period = config_.server.tick_period;
  Runner runner;
  runner.session = session;
  runner.thread = std::jthread([this, session, period](std::stop_token stop) {
    std::mutex m;
    std::condition_variable_any cv;
    auto next = std::chrono::steady_clock::now();
    while (!stop.stop_requested()) {
      session->Tick(Now());
      next += std::chrono::duration_cast<std::chrono::steady_clock::duration>(
          std::chrono::duration<double>(period));
      std::unique_lock lock(m);
      cv.wait_until(lock, stop, next, [] { return false; });
    }
  });
  return runners_.emplace(id, std::move(runner)).first->second.session;
}

void SessionHub::Reap() {
  for (auto it = runners_.begin(); it != runners_.end();) {
    if (it->second.session->Idle()) it = runners_.erase(it);
    else ++it;
  }
}

std::size_t SessionHub::session_count() const {
  std::lock_guard lock(mu_);
  return runners_.size();
}

void SessionHub::Stop() {
  std::map<std::string, Runner> runners;
  {
    std::lock_guard lock(mu_);
    runners.swap(runners_);
    routes_.clear();
    pending_.clear();
  }
  runners.clear();  // jthread destructors request stop and join
}

}  // namespace duel::server
