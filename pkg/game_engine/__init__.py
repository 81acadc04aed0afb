# Motor del juego: pagos, simplex exacto, oráculo y simulación
