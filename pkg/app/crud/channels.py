from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from app.core.errors import ChannelValidationError
from app.crud.base import JSONFileCRUD, PathLike
from app.models.channel import DMWiretapChannel, InputDistribution
from app.schemas.channel import ChannelFile
from app.services.information import validate_channel
from app.services.logging import logging_service


class CRUDChannel(JSONFileCRUD[ChannelFile]):
    def load(self, path: PathLike) -> Tuple[DMWiretapChannel, Optional[List[InputDistribution]]]:
        """
        讀取通道檔案並驗證轉移機率表

        Raises:
            ChannelValidationError: 轉移機率表無效
        """
        document = self.read(path)
        ch = document.to_channel()
        violations = validate_channel(ch)
        if violations:
            logging_service.warning(
                "channel", "Channel file rejected", {"path": str(path), "violations": len(violations)}
            )
            raise ChannelValidationError(
                "通道轉移機率表無效",
                {"path": str(path), "violations": [v.describe() for v in violations[:20]]},
            )
        return ch, document.to_inputs()

    def save(
        self, path: PathLike, ch: DMWiretapChannel, inputs: Optional[Sequence[InputDistribution]] = None
    ) -> Path:
        return self.write(path, ChannelFile.from_domain(ch, inputs))


channel = CRUDChannel(ChannelFile)
