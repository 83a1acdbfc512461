from typing import Any

from pydantic import BaseModel, ConfigDict


class DomainModel(BaseModel):
    """Base class for all domain models: immutable, strict about unknown fields."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    def to_dict(self) -> dict[str, Any]:
        """Convert model to a JSON-compatible dictionary."""
        return self.model_dump(mode="json")
