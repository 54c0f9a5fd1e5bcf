#pragma once

#include <stdexcept>
#include <string>

namespace personae {

// Root of every domain error thrown by the library. The CLI maps these to
// exit code 1; std::invalid_argument from option parsing maps to 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

// --- llm gateway -----------------------------------------------------------

class GatewayError : public Error {
public:
    using Error::Error;
};

class InvalidRequest : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class BackendUnavailable : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class AuthFailure : public GatewayError {
public:
    using GatewayError::GatewayError;
};

class ScriptExhausted : public GatewayError {
public:
    using GatewayError::GatewayError;
};

// --- evidence retrieval ----------------------------------------------------

class ProviderUnavailable : public Error {
public:
    using Error::Error;
};

class EmptyResults : public Error {
public:
    using Error::Error;
};

// --- memory store ----------------------------------------------------------

class NotSupportedLabel : public Error {
public:
    using Error::Error;
};

class StorageFailure : public Error {
public:
    using Error::Error;
};

// --- scenario engine -------------------------------------------------------

class SessionStopped : public Error {
public:
    using Error::Error;
};

class ParseFailure : public Error {
public:
    using Error::Error;
};

// --- time diffraction ------------------------------------------------------

class InvalidRange : public Error {
public:
    using Error::Error;
};

class TooFewMaxima : public Error {
public:
    using Error::Error;
};

class IoFailure : public Error {
public:
    using Error::Error;
};

} // namespace personae
