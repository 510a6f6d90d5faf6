#include "lolo/log.hpp"

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>

namespace lolo {

spdlog::logger& log() {
    static std::shared_ptr<spdlog::logger> logger = [] {
        auto l = spdlog::stderr_color_mt("lolo-dcv");
        l->set_pattern("[%l] %v");
        spdlog::level::level_enum level = spdlog::level::warn;
        if (const char* env = std::getenv("LOLO_DCV_LOG"))
            level = spdlog::level::from_str(env);
        l->set_level(level);
        return l;
    }();
    return *logger;
}

}  // namespace lolo
