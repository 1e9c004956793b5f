#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "sarslide/cli/config.hpp"

namespace sarslide::cli {

void cmd_synth(const CliConfig& cfg, bool force, std::ostream& out);
void cmd_split(const CliConfig& cfg, std::ostream& out);
void cmd_pretrain(const CliConfig& cfg, std::ostream& out);
void cmd_trainseg(const CliConfig& cfg, std::ostream& out);
void cmd_ablate(const CliConfig& cfg, std::ostream& out);
void cmd_eval(const CliConfig& cfg, std::ostream& out);
void cmd_report(const CliConfig& cfg, std::ostream& out);

/// Parses `args` (without the program name) and runs one subcommand.
/// Returns the process exit code: 0 success, 2 config error, 3 data error,
/// 4 training failure. Failures print one `error: code=... message=...` line
/// to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sarslide::cli
