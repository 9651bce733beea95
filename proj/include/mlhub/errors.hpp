#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mlhub {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& message)
        : std::runtime_error(message) {}
};

/// Client-side validation failure (bad filter, malformed id, ...). No request was sent.
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// Network-level failure (connect/read/write), raised after retries were exhausted.
class TransportError : public Error {
  public:
    using Error::Error;
};

/// Non-2xx HTTP response from the hub.
class HttpError : public Error {
  public:
    HttpError(int status, const std::string& message)
        : Error(message),
          status_(status) {}

    int status() const { return status_; }

  private:
    int status_;
};

class NotFoundError : public HttpError {
  public:
    explicit NotFoundError(const std::string& message)
        : HttpError(404, message) {}
};

/// 401/403: missing key, unknown key, read-only key on a write, or not the owner.
class AuthError : public HttpError {
  public:
    AuthError(int status, const std::string& message)
        : HttpError(status, message) {}
};

/// A flow from another toolkit cannot be converted into a built-in learner.
class UnsupportedFlowError : public Error {
  public:
    explicit UnsupportedFlowError(const std::string& flow_name)
        : Error("flow '" + flow_name + "' was not created by this client and cannot be converted"),
          flow_name_(flow_name) {}

    const std::string& flow_name() const { return flow_name_; }

  private:
    std::string flow_name_;
};

}  // namespace mlhub
