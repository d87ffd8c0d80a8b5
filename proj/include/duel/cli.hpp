#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace duel {

using EnvLookup = std::function<std::optional<std::string>(const std::string&)>;

/// Entry point of the `duel` command. `args` excludes the program name.
/// Settings resolve as: command-line flag > DUEL_* environment > config
/// file > built-in default. `env` defaults to the process environment.
/// Returns the process exit code: 0 success, 1 runtime failure, 2 bad
/// usage or configuration.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err, const EnvLookup& env = {});

}  // namespace duel
