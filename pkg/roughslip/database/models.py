# Rough-wall study - Database Models
from sqlalchemy import Column, Integer, String, Text, DateTime, Boolean, Float, JSON
from sqlalchemy.orm import declarative_base
from sqlalchemy.sql import func

Base = declarative_base()

class SweepRecord(Base):
    __tablename__ = "sweep_records"

    id = Column(Integer, primary_key=True, index=True)
    study = Column(String, index=True)
    position = Column(Integer, default=0)  # order within the sweep

    # Pair
    epsilon = Column(Float, nullable=False)
    nu = Column(Float, nullable=False)
    alpha = Column(Float)
    N = Column(Integer)
    grid_x1 = Column(Integer, default=0)
    grid_x2 = Column(Integer, default=0)
    T0 = Column(Float, default=0.0)

    # Theorem quantities
    q_l2_scaled = Column(Float, nullable=True)
    q_linf = Column(Float, nullable=True)
    q_curl_scaled = Column(Float, nullable=True)

    # Distance to the inviscid flat-wall flow u0
    limit_l2 = Column(Float, nullable=True)
    limit_linf = Column(Float, nullable=True)

    # Approximation scalings
    resid_curl_linf = Column(Float, nullable=True)
    resid_curl_l2 = Column(Float, nullable=True)
    layer_linf = Column(Float, nullable=True)
    layer_l2 = Column(Float, nullable=True)
    interior_linf = Column(Float, nullable=True)

    # Solver health
    wall_slip_linf = Column(Float, nullable=True)
    wall_bc_defect = Column(Float, nullable=True)
    energy_drift = Column(Float, nullable=True)
    weight_m = Column(Float, nullable=True)

    regime = Column(String, default="outside")  # theorem, outside
    resolution = Column(String, default="unresolved")  # resolved, extrapolated
    runtime_s = Column(Float, nullable=True)
    status = Column(String, default="ok")  # ok, failed
    error = Column(Text, nullable=True)

    created_at = Column(DateTime(timezone=True), server_default=func.now())

class CheckRecord(Base):
    __tablename__ = "check_records"

    id = Column(Integer, primary_key=True, index=True)
    suite = Column(String, index=True)
    name = Column(String)
    value = Column(Float)
    bound = Column(Float)
    passed = Column(Boolean, default=False)
    degenerate = Column(Boolean, default=False)
    details = Column(JSON, nullable=True)

    created_at = Column(DateTime(timezone=True), server_default=func.now())
