#ifndef SUPERCRIT_CLI_HPP
#define SUPERCRIT_CLI_HPP

namespace supercrit {

/// Entry point of the supercrit executable; returns the process exit code.
int cli_dispatch(int argc, char** argv);

}  // namespace supercrit

#endif  // SUPERCRIT_CLI_HPP
