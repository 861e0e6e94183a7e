from pydantic import BaseModel, Field, ConfigDict


class ErrorResponse(BaseModel):
    model_config = ConfigDict(
        json_schema_extra={"examples": [{"detail": "K=4 antennas must exceed the pilot length 4"}]}
    )

    detail: str = Field(description="Human-readable error detail.")
