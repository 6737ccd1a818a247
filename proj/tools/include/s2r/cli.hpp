#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

namespace s2r::cli {

// Usage errors count as configuration errors.
enum ExitCode : int { kExitOk = 0, kExitConfig = 2, kExitRuntime = 3 };

// Entry point of the `s2r` tool; `args` excludes the program name.
//
//   train     --config FILE [--set key=value]... [--run-dir DIR] [--resume CKPT]
//   eval      --checkpoint CKPT [--split split1|split2|all] [--out DIR] [--seed N] [--set key=value]...
//   generate  --checkpoint CKPT --labels DIR --out DIR [--seed N]
//   ablate    --preset alignment|discrimination [--steps N] [--config FILE] [--set key=value]... [--out DIR]
//   make-toy  --out DIR [--seed N] [--synthetic N] [--real N] [--classes C] [--height H] [--width W]
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// $S2R_RUN_ROOT when set, else ./runs.
std::filesystem::path default_run_root();

}  // namespace s2r::cli
