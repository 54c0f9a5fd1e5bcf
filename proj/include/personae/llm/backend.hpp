#pragma once

#include <memory>

#include "personae/llm/types.hpp"

namespace personae::llm {

/// A chat-completion backend. Implementations must be callable from several
/// threads at once; they may serialize internally.
class Backend {
public:
    virtual ~Backend() = default;

    ChatResponse complete(const ChatRequest& request) {
        validate(request);
        return do_complete(request);
    }

private:
    virtual ChatResponse do_complete(const ChatRequest& request) = 0;
};

using BackendHandle = std::shared_ptr<Backend>;

inline ChatResponse complete(const ChatRequest& request, Backend& backend) {
    return backend.complete(request);
}

} // namespace personae::llm
