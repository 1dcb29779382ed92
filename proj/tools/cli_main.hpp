#pragma once

namespace paws {

/// Entry point behind the paws binary; exposed so tests can drive the CLI
/// in-process. Returns 0 on success, 1 on validation/usage errors, 2 on
/// runtime failures.
int cli_main(int argc, const char* const* argv);

}  // namespace paws
