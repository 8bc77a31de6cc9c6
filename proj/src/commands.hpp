#pragma once

#include <string>

namespace npgraph::commands {

// Executes one subcommand ("simulate", "fit", "study", "select-basis") with a
// JSON configuration document; writes result files into the configured output
// directory. Throws Error on any failure.
void run(const std::string& command, const std::string& config_json);

}  // namespace npgraph::commands
