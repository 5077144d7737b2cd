#ifndef BFW_BFW_HPP
#define BFW_BFW_HPP

// Everything except the command-line layer (bfw/cli.hpp), which pulls in CLI11.

#include "bfw/error.hpp"
#include "bfw/partition.hpp"
#include "bfw/observables.hpp"
#include "bfw/engine.hpp"
#include "bfw/theory.hpp"
#include "bfw/ensemble.hpp"
#include "bfw/io.hpp"

#endif  // BFW_BFW_HPP
