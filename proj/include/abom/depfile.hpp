#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace abom {

/// Prerequisites of every rule in make-style dependency output (as written
/// by `cc -M`). Handles line continuations, backslash-escaped spaces and
/// '#', and "$$". Targets are dropped; prerequisites keep their order of
/// first appearance and may repeat across rules.
std::vector<std::string> parse_make_deps(std::string_view text);

}  // namespace abom
