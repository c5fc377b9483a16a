"""lancekit: project-aware API completion toolkit.

Indexes an unseen repository's API surface, ranks candidate signatures for a
completion request with deterministic embeddings, builds context-augmented
prompts for a pluggable chat backend, and scores completions with
call-accuracy and argument-matching metrics.
"""

from .context import (
    CompletionContext,
    ConversationalQuery,
    TokenSite,
    analyze_token_site,
    match_entity,
    parse_query,
    rank_conversational_candidates,
    rank_token_candidates,
    resolve_receiver,
)
from .embed import EmbeddingVector, HashEmbedder, RemoteEmbedder, embed_hash
from .evaluate import (
    EvalReport,
    EvalTask,
    load_tasks,
    parse_predicted_call,
    run_eval,
    score_arguments,
    score_call,
)
from .extract import index_repository
from .llm import (
    LlmGateway,
    LlmResponse,
    MockLlmClient,
    RemoteLlmClient,
    complete,
    mock_complete,
)
from .model import (
    ApiFunction,
    EntityRecord,
    ImportBinding,
    Language,
    Parameter,
    RepoIndex,
    Visibility,
    load_index,
    save_index,
)
from .prompt import PromptBundle, build_query_prompt, build_token_prompt
from .vindex import VectorIndex, build_vector_index, query_topk

__version__ = "0.1.0"

__all__ = [
    "ApiFunction",
    "CompletionContext",
    "ConversationalQuery",
    "EmbeddingVector",
    "EntityRecord",
    "EvalReport",
    "EvalTask",
    "HashEmbedder",
    "ImportBinding",
    "Language",
    "LlmGateway",
    "LlmResponse",
    "MockLlmClient",
    "Parameter",
    "PromptBundle",
    "RemoteEmbedder",
    "RemoteLlmClient",
    "RepoIndex",
    "TokenSite",
    "VectorIndex",
    "Visibility",
    "analyze_token_site",
    "build_query_prompt",
    "build_token_prompt",
    "build_vector_index",
    "complete",
    "embed_hash",
    "index_repository",
    "load_index",
    "load_tasks",
    "match_entity",
    "mock_complete",
    "parse_predicted_call",
    "parse_query",
    "query_topk",
    "rank_conversational_candidates",
    "rank_token_candidates",
    "resolve_receiver",
    "run_eval",
    "save_index",
    "score_arguments",
    "score_call",
]
