from pydantic import BaseModel, ConfigDict, Field, model_validator

from squeezer.constants import SILICA_DENSITY, SILICA_PERMITTIVITY


class PhysicalSetup(BaseModel):
    """
    Coherent-scattering setup: tweezers, cavity and levitated particle (SI units)
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    P_t: float = Field(gt=0, allow_inf_nan=False, description="tweezers power [W]")
    W_t: float = Field(gt=0, allow_inf_nan=False, description="tweezers waist [m]")
    A_x: float = Field(gt=0, le=1, description="beam asymmetry factor along x")
    A_y: float = Field(gt=0, le=1, description="beam asymmetry factor along y")
    lambda_t: float = Field(gt=0, allow_inf_nan=False, description="tweezers wavelength [m]")
    lambda_c: float = Field(gt=0, allow_inf_nan=False, description="cavity wavelength [m]")
    R: float = Field(gt=0, allow_inf_nan=False, description="particle radius [m]")
    epsilon_rel: float = Field(SILICA_PERMITTIVITY, gt=0, allow_inf_nan=False)
    rho_mass: float = Field(SILICA_DENSITY, gt=0, allow_inf_nan=False, description="density [kg/m^3]")
    L_c: float = Field(gt=0, allow_inf_nan=False, description="cavity length [m]")
    finesse: float = Field(gt=0, allow_inf_nan=False)

    @model_validator(mode="after")
    def check_sub_wavelength(self):
        if self.R >= self.lambda_t:
            raise ValueError("particle radius must be smaller than the tweezers wavelength")
        return self

    @classmethod
    def from_lab_units(
        cls,
        P_t_mW: float,
        W_t_um: float,
        A_x: float,
        A_y: float,
        lambda_t_nm: float,
        lambda_c_nm: float,
        R_nm: float,
        L_c_um: float,
        finesse: float,
        epsilon_rel: float = SILICA_PERMITTIVITY,
        rho_mass: float = SILICA_DENSITY,
    ) -> "PhysicalSetup":
        """Build a setup from mW / micrometer / nanometer inputs"""
        return cls(
            P_t=P_t_mW * 1e-3,
            W_t=W_t_um * 1e-6,
            A_x=A_x,
            A_y=A_y,
            lambda_t=lambda_t_nm * 1e-9,
            lambda_c=lambda_c_nm * 1e-9,
            R=R_nm * 1e-9,
            epsilon_rel=epsilon_rel,
            rho_mass=rho_mass,
            L_c=L_c_um * 1e-6,
            finesse=finesse,
        )

    def with_cavity_length(self, L_c: float) -> "PhysicalSetup":
        return self.model_copy(update={"L_c": L_c})


class DerivedRates(BaseModel):
    """Model rates of a PhysicalSetup, SI units (rad/s, kg, m)"""
    model_config = ConfigDict(frozen=True)

    omega: float
    g: float
    kappa: float
    gamma_disp: float
    mass: float
    alpha: float
    W_c: float
    omega_c: float
    omega_t: float
