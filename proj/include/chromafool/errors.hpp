#pragma once

#include <stdexcept>
#include <string>

namespace chromafool {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Image files.
class NotFoundError : public Error {
 public:
  using Error::Error;
};
class FormatError : public Error {
 public:
  using Error::Error;
};
class ChannelCountError : public FormatError {
 public:
  using FormatError::FormatError;
};
class IoError : public Error {
 public:
  using Error::Error;
};

// Oracle access.
class QueryLimitExhausted : public Error {
 public:
  using Error::Error;
};
class TransportError : public Error {
 public:
  using Error::Error;
};
class MalformedResponse : public Error {
 public:
  using Error::Error;
};
// A well-formed response carrying a value outside its declared range.
class OutOfRangeResponse : public MalformedResponse {
 public:
  using MalformedResponse::MalformedResponse;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace chromafool
