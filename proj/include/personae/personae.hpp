#pragma once

#include "personae/error.hpp"
#include "personae/verdict_label.hpp"
#include "personae/util/files.hpp"
#include "personae/util/text.hpp"
#include "personae/llm/types.hpp"
#include "personae/llm/backend.hpp"
#include "personae/llm/mock_backend.hpp"
#include "personae/llm/http_backend.hpp"
#include "personae/retrieval/domain.hpp"
#include "personae/retrieval/types.hpp"
#include "personae/retrieval/provider.hpp"
#include "personae/retrieval/evidence.hpp"
#include "personae/deconfab/types.hpp"
#include "personae/deconfab/segment.hpp"
#include "personae/deconfab/verdict.hpp"
#include "personae/deconfab/pipeline.hpp"
#include "personae/memory/store.hpp"
#include "personae/scenario/types.hpp"
#include "personae/scenario/engine.hpp"
#include "personae/scenario/spec_file.hpp"
#include "personae/physics/diffraction.hpp"
#include "personae/physics/grid.hpp"
#include "personae/physics/render.hpp"
#include "personae/physics/params.hpp"
#include "personae/trial/harness.hpp"
#include "personae/service/server.hpp"
