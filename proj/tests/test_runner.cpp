#include <catch2/catch_amalgamated.hpp>
#include "fdde/fdde.hpp"
