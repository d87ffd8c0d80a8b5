#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>

namespace duel::server {

/// JSON text messages, one per WebSocket frame. Every message carries
/// "protocol": kProtocolVersion and a "type".
///
/// client -> server
///   {"type":"join", "role":"driver"|"spectator", "session":"<id>"?}
///   {"type":"ready"}
///   {"type":"input", "v":m/s, "omega":rad/s, "client_time":s}
/// server -> client
///   {"type":"welcome", "session", "role", "client"}
///   {"type":"state", "session", "phase", "t", "step", "countdown",
///    "ego":{x,y,theta,v}, "opponent":{...}, "beliefs":[3], "potential",
///    "plans":{"best":[[x,y]...], "failsafe":[...], "mixed":[...]}}
///   {"type":"result", "outcome", "collision", "t"}
///   {"type":"error", "code", "detail"}
inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxMessageBytes = 8192;

enum class Role { kDriver, kSpectator };
enum class Phase { kLobby, kCountdown, kRunning, kFinished };

std::string ToString(Role r);
std::string ToString(Phase p);

struct JoinMsg {
  Role role = Role::kSpectator;
  std::optional<std::string> session;
};
struct ReadyMsg {};
struct InputMsg {
  double v = 0.0;
  double omega = 0.0;
  double client_time = 0.0;
};

using ClientMessage = std::variant<JoinMsg, ReadyMsg, InputMsg>;

/// Rejected client message; `code` goes into the error reply.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& detail)
      : std::runtime_error(detail), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

/// Throws ProtocolError on oversize, non-JSON, wrong version, unknown
/// type or missing / non-finite fields.
ClientMessage ParseClientMessage(const std::string& text);

std::string ErrorMessage(const std::string& code, const std::string& detail);

}  // namespace duel::server
