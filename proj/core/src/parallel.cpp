#include "nmdecay/parallel.hpp"

#include <cstdlib>
#include <string>

#include "nmdecay/error.hpp"

namespace nmdecay {

int thread_count(int requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("NMDECAY_THREADS"); env && *env) {
        try {
            const int n = std::stoi(env);
            if (n > 0) return n;
        } catch (const std::exception&) {
        }
        throw ConfigError(std::string("NMDECAY_THREADS must be a positive integer, got '") + env + "'");
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

}  // namespace nmdecay
