# Núcleo de órdenes parciales: posets, búsquedas y anticadenas
