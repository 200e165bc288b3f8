"""Application configuration utilities."""

from functools import lru_cache
from typing import Tuple, Type

from pydantic import Field
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class Settings(BaseSettings):
    """Numerical tolerances, resource caps and optimizer defaults.

    Only constructor arguments are honoured; the environment is never read so
    that every run is reproducible from its command line alone.
    """

    model_config = SettingsConfigDict(
        frozen=True,
        extra="forbid",
    )

    tol_exact: float = Field(
        default=1e-10,
        gt=0.0,
        le=1e-3,
    )
    kraus_prune: float = Field(
        default=1e-12,
        ge=0.0,
    )
    entropy_floor: float = Field(
        default=1e-14,
        ge=0.0,
    )
    max_total_dim: int = Field(
        default=2**12,
        ge=2,
    )
    choi_max_qubits: int = Field(
        default=6,
        ge=1,
        le=12,
    )
    stinespring_max_qubits: int = Field(
        default=10,
        ge=1,
        le=16,
    )

    default_restarts: int = Field(
        default=20,
        ge=1,
    )
    default_max_iters: int = Field(
        default=200,
        ge=1,
    )
    default_conv_tol: float = Field(
        default=1e-9,
        gt=0.0,
    )
    cross_tol: float = Field(
        default=2e-3,
        gt=0.0,
    )
    grid_resolution: int = Field(
        default=12,
        ge=2,
    )

    agreement_samples: int = Field(
        default=4,
        ge=1,
    )
    agreement_seed: int = Field(
        default=0,
        ge=0,
    )

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: Type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> Tuple[PydanticBaseSettingsSource, ...]:
        return (init_settings,)

    def scaled_tol(self, dim: int) -> float:
        """Return ``tol_exact`` scaled for a matrix of dimension ``dim``."""

        return self.tol_exact * max(1, dim)


@lru_cache()
def get_settings() -> Settings:
    """Return cached settings instance."""

    return Settings()
