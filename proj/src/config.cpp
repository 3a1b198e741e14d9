#include "bikeflow/config.hpp"

#include <cstdlib>
#include <string>
#include <thread>

namespace bikeflow {

unsigned resolve_threads(unsigned hint) {
    if (const char* env = std::getenv("BIKEFLOW_THREADS"); env && *env) {
        try {
            const unsigned long v = std::stoul(env);
            if (v > 0) hint = unsigned(v);
        } catch (...) {
        }
    }
    if (hint == 0) hint = std::max(1u, std::thread::hardware_concurrency());
    return hint;
}

}  // namespace bikeflow
