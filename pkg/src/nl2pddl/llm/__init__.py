from .client import (
    AuthError,
    BudgetExceeded,
    Completion,
    FixtureMissing,
    FixtureStore,
    LLMClient,
    LLMConfig,
    LLMError,
    RunLedger,
    TransportError,
)
from .sections import MissingSection, extract_sections, section_block, split_sections
from .templates import (
    KNOWN_PLACEHOLDERS,
    NO_PREDICATES,
    MissingPlaceholder,
    PromptTemplate,
    TemplateError,
    UnknownPlaceholder,
    format_predicate_list,
    render_prompt,
)

__all__ = [
    "AuthError", "BudgetExceeded", "Completion", "FixtureMissing", "FixtureStore",
    "KNOWN_PLACEHOLDERS", "LLMClient", "LLMConfig", "LLMError", "MissingPlaceholder",
    "MissingSection", "NO_PREDICATES", "PromptTemplate", "RunLedger", "TemplateError",
    "TransportError", "UnknownPlaceholder", "extract_sections", "format_predicate_list",
    "render_prompt", "section_block", "split_sections",
]
