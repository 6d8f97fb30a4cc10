#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "gevo/corpus.hpp"

namespace gevo {

// Entry point shared by the binary and in-process tests. `args` excludes the
// program name. Exit codes: 0 success, 1 usage error, 2 runtime error.
// Diagnostics go to `err`, data to `out` or files.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err,
            const std::vector<CorpusOps>& corpus_entries);

}  // namespace gevo
