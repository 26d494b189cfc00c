"""Request and response models for the simulation service."""

from __future__ import annotations

from pydantic import BaseModel


class ValidateRequest(BaseModel):
    scenario: dict


class RunRequest(BaseModel):
    scenario: dict
    check: bool = False


class ReplayRequest(BaseModel):
    scenario: dict


class ValidateResponse(BaseModel):
    valid: bool
    retailer: str
    warehouses: list[str]
    manufacturers: list[str]
    customers: list[str]
    orders: int


class MetricsOut(BaseModel):
    orders_total: int
    orders_closed: int
    orders_rejected: int
    fill_rate: str
    fill_rate_decimal: str
    mean_cycle_time: str
    mean_cycle_time_decimal: str
    cycle_time_defined: bool
    replenishments: int
    declines: int


class RunResponse(BaseModel):
    log: str
    metrics: MetricsOut
    final_time: int
    event_count: int


class ReplayResponse(BaseModel):
    passed: bool
    line_number: int | None = None
    first_run: str | None = None
    second_run: str | None = None
