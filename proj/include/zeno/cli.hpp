#pragma once

#include <string>
#include <vector>

namespace zeno::cli {

/// Entry point behind the zeno-lab executable.  args does not include the
/// program name.  Returns 0 on success, 2 on usage errors, 1 on numerical
/// failures.
int run(const std::vector<std::string>& args);

}  // namespace zeno::cli
