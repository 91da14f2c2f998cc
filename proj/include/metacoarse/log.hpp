#ifndef METACOARSE_LOG_HPP_
#define METACOARSE_LOG_HPP_

#include <functional>
#include <string_view>

namespace metacoarse {

enum class LogLevel { kInfo, kWarning };

using LogSink = std::function<void(LogLevel, std::string_view)>;

// Replaces the process-wide sink. Passing an empty function silences logging.
// The default sink writes warnings to stderr and drops info messages.
void set_log_sink(LogSink sink);

void log_info(std::string_view message);
void log_warning(std::string_view message);

}  // namespace metacoarse

#endif  // METACOARSE_LOG_HPP_
