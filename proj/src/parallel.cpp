// parallel.cpp — worker-count resolution
#include "darkloc/parallel.hpp"

#include <cstdlib>
#include <stdexcept>
#include <string>

namespace darkloc::parallel {

std::size_t resolve_workers(std::optional<std::size_t> requested) {
    if (requested) {
        if (*requested == 0) throw std::invalid_argument("--workers must be >= 1");
        return *requested;
    }
    if (const char* env = std::getenv("DARKLOC_WORKERS"); env && *env) {
        std::size_t pos = 0;
        unsigned long v = 0;
        try {
            v = std::stoul(env, &pos);
        } catch (const std::exception&) {
            pos = 0;
        }
        // stoul would wrap "-2" silently
        if (env[0] < '0' || env[0] > '9' || pos != std::string(env).size() || v == 0)
            throw std::invalid_argument(std::string("DARKLOC_WORKERS must be a positive integer, got '") +
                                        env + "'");
        return v;
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

} // namespace darkloc::parallel
