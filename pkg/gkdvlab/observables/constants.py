from pydantic import BaseModel, ConfigDict, Field

ILLUSTRATIVE = "illustrative, not derived from the smoothing estimates"

class ExistenceConstants(BaseModel):
    """Contraction constants c_k, C~_k, C-_k and the nu_2 exponent rho.

    The defaults are placeholders; outputs carry `provenance` so no one mistakes
    them for sharp constants.
    """
    model_config = ConfigDict(extra="forbid", frozen=True)

    c_k: float = Field(default=1.0, gt=0)
    C_tilde: float = Field(default=1.0, gt=0)
    C_bar: float = Field(default=1.0, gt=0)
    rho: float = Field(default=1.0, gt=0)
    provenance: str = ILLUSTRATIVE
