#include "matnet/error.hpp"

namespace matnet {

IngestError::IngestError(const std::string& file, std::size_t line, const std::string& what)
    : ConfigError(file + (line > 0 ? ":" + std::to_string(line) : std::string()) + ": " + what),
      line_(line) {}

NonconvergenceError::NonconvergenceError(const std::string& what, std::size_t step,
                                         double residual_norm, std::vector<double> last_iterate)
    : Error(what), step_(step), residual_norm_(residual_norm),
      last_iterate_(std::move(last_iterate)) {}

}  // namespace matnet
