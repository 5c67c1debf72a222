from app.crud.channels import channel
from app.crud.regions import region
from app.crud.results import result

__all__ = ["channel", "region", "result"]
