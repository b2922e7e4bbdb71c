from sqlalchemy import ForeignKey
from sqlalchemy.orm import Mapped, mapped_column, DeclarativeBase, relationship
from sqlalchemy import BigInteger, Integer, String, DateTime, Float, Text


class Base(DeclarativeBase):
    pass


class ScalingRun(Base):
    __tablename__ = "scaling_runs"
    id: Mapped[int] = mapped_column(primary_key=True, unique=True)
    law_name: Mapped[str] = mapped_column(String(100), nullable=False)
    seed: Mapped[int] = mapped_column(BigInteger, nullable=False)
    n_list: Mapped[str] = mapped_column(Text, nullable=False)  # comma separated, e.g. "64,256,1024"
    replicas: Mapped[int] = mapped_column(Integer, nullable=False)
    eta_mode: Mapped[str] = mapped_column(String(30), default="gamma")  # "gamma" or a fixed eta
    summary: Mapped[str] = mapped_column(Text, nullable=True)  # ScalingSummary as JSON
    created_at: Mapped[DateTime] = mapped_column(DateTime)

    rows: Mapped[list["ScalingRowRecord"]] = relationship(back_populates="run", cascade="all, delete-orphan")


class ScalingRowRecord(Base):
    __tablename__ = "scaling_rows"
    run_id: Mapped[int] = mapped_column(ForeignKey("scaling_runs.id"), primary_key=True)
    n: Mapped[int] = mapped_column(Integer, primary_key=True)
    replicate: Mapped[int] = mapped_column(Integer, primary_key=True)
    seed: Mapped[int] = mapped_column(BigInteger, nullable=False)
    max_dev: Mapped[float] = mapped_column(Float, nullable=False)
    terminal_dev: Mapped[float] = mapped_column(Float, nullable=False)
    s_n: Mapped[float] = mapped_column(Float, nullable=False)
    gamma2: Mapped[float] = mapped_column(Float, nullable=False)

    run: Mapped["ScalingRun"] = relationship(back_populates="rows")
